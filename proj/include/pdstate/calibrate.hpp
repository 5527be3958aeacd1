#pragma once

// Certainty calibration: Platt sigmoid over cross-validated decision values
// and selection of the certainty threshold.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdstate/matrix.hpp"
#include "pdstate/svm.hpp"
#include "pdstate/types.hpp"

namespace pdstate::calibrate {

/** P(OFF | d) = 1 / (1 + exp(a d + b)). */
struct PlattParams {
    double a = 0.0;
    double b = 0.0;
};

struct CvDecisions {
    std::vector<double> values;      // aligned with the training rows
    bool activity_folds = true;      // false when the stratified fallback was used
    std::vector<std::string> warnings;
};

/**
 * Out-of-fold decision values. With exactly four activities, each having both
 * classes, every activity is held out in turn; otherwise seeded stratified
 * 4-fold CV is used and a warning recorded.
 */
CvDecisions cv_decision_values(const Matrix& x, std::span<const double> y, std::span<const Activity> activities,
                               const svm::HyperParams& params, std::uint64_t seed = 0);

struct PlattFit {
    PlattParams params;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> nll_trace;  // objective after each accepted iterate
};

/// Negative log-likelihood with Platt's regularized targets.
double platt_nll(const PlattParams& p, std::span<const double> decisions, std::span<const double> labels);

/// Newton's method with backtracking; stops when |grad| < 1e-8, when the Newton decrement drops
/// below the objective's rounding noise, or after 200 iterations.
PlattFit platt_fit(std::span<const double> decisions, std::span<const double> labels);

/// Posterior of the OFF (+1) class.
double posterior_off(double decision, const PlattParams& p);

/// Confidence in the label implied by the sign of `m`: P(OFF) for m >= 0, 1 - P(OFF) for m < 0.
double certainty(double m, const PlattParams& p);

/// 0.50, 0.55, ..., 0.90
std::vector<double> threshold_grid();

/// Largest grid value rejecting at most 1% of `certainties` (0.50 if none qualifies).
double select_threshold(std::span<const double> certainties);

double rejection_rate(std::span<const double> certainties, double threshold);

/// CSV "decision,p_off" sampled uniformly over [lo, hi].
std::string sigmoid_curve_csv(const PlattParams& p, double lo, double hi, std::size_t points = 201);
/// CSV "threshold,rejection_rate,accuracy" for each grid threshold on the training set.
std::string rejection_table_csv(std::span<const double> decisions, std::span<const double> labels,
                                const PlattParams& p);

}  // namespace pdstate::calibrate
