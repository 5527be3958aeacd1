#pragma once

// Soft-margin binary SVM (linear and RBF kernels), trained by SMO, plus
// hyperparameter grid search and recursive feature elimination.
//
// Labels are +1 for OFF and -1 for ON; a positive decision value means OFF.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdstate/matrix.hpp"

namespace pdstate::svm {

enum class KernelKind { Linear, Rbf };

std::string to_string(KernelKind k);
KernelKind parse_kernel(const std::string& text);

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    double gamma = 0.0;  // RBF only

    void validate() const;
    double operator()(std::span<const double> a, std::span<const double> b) const;
    bool operator==(const KernelSpec&) const = default;
};

struct HyperParams {
    KernelSpec kernel;
    double c = 1.0;

    bool operator==(const HyperParams&) const = default;
};

struct SolverOptions {
    double tolerance = 1e-3;         // stop when the maximal KKT violation pair gap is below this
    std::size_t max_iterations = 0;  // 0 = max(10^7, 100 n)
    bool record_objective = false;   // keep the dual objective after each pass of n iterations
};

/** z-score parameters fitted on training rows; scale is 1 for constant columns. */
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
    std::vector<double> apply(std::span<const double> row) const;
};

struct TrainedSvm {
    KernelSpec kernel;
    double c = 1.0;
    Matrix support_vectors;
    std::vector<double> dual_coef;  // alpha_i * y_i per support vector
    double bias = 0.0;

    // Diagnostics of the training run (not serialized).
    std::vector<double> alpha;  // one per training row
    std::vector<std::size_t> support_indices;
    std::size_t iterations = 0;
    bool converged = true;
    std::vector<double> objective_trace;

    double decision(std::span<const double> x) const;
    std::vector<double> decision_values(const Matrix& x) const;
    /// Primal weights; linear kernel only.
    std::vector<double> linear_weights() const;
    /// Dual objective sum(alpha) - 1/2 ||w||^2 evaluated on the support vectors.
    double margin_objective() const;
};

/**
 * Trains on rows of `x` with labels `y` in {+1, -1}. Both classes must be
 * present and the rows must not all be identical.
 */
TrainedSvm train(const Matrix& x, std::span<const double> y, const HyperParams& params,
                 const SolverOptions& options = {});

inline double predict_sign(double decision) { return decision > 0.0 ? 1.0 : -1.0; }

/// Linear x {2^-2..2^2} then RBF x {2^-2..2^2} x {2^-4..2^4}: 50 configurations.
std::vector<HyperParams> default_grid();

/// Fold index per row; each class is spread round-robin over folds after a seeded shuffle.
std::vector<std::size_t> stratified_folds(std::span<const double> y, std::size_t folds, std::uint64_t seed);

double cv_accuracy(const Matrix& x, std::span<const double> y, const HyperParams& params,
                   std::span<const std::size_t> fold_of, std::size_t folds);

struct GridEntry {
    HyperParams params;
    double cv_accuracy = 0.0;
};

struct GridSearchResult {
    std::vector<GridEntry> entries;
    HyperParams best;
    double best_accuracy = 0.0;
    // Filled by select_model: the RFE subset for the winning configuration.
    std::vector<std::size_t> selected_features;
    std::vector<double> rfe_trace;
};

/// Winner maximizes CV accuracy; ties prefer linear, then smaller c, then smaller gamma.
GridSearchResult grid_search(const Matrix& x, std::span<const double> y, std::size_t folds = 4,
                             std::uint64_t seed = 0, const std::vector<HyperParams>& grid = default_grid());

struct RfeResult {
    std::vector<std::size_t> subset;      // column indices into x, ascending
    TrainedSvm model;                     // trained on x restricted to subset
    std::vector<double> accuracy_trace;   // entry i: CV accuracy with (initial - i) features
    std::vector<std::size_t> elimination_order;
};

/**
 * Backward elimination. Each step trains on the current subset, ranks features
 * (linear: |w_j|; RBF: drop in the margin objective when j is removed from the
 * kernel) and removes the lowest. Returns the subset with the best CV accuracy,
 * ties going to the smaller subset.
 */
RfeResult rfe(const Matrix& x, std::span<const double> y, const HyperParams& params, std::size_t folds = 4,
              std::uint64_t seed = 0);

/// Per-feature elimination scores for a trained model (higher = more useful).
std::vector<double> feature_scores(const TrainedSvm& model);

/// grid_search followed by rfe with the winning configuration.
GridSearchResult select_model(const Matrix& x, std::span<const double> y, std::size_t folds = 4,
                              std::uint64_t seed = 0);

}  // namespace pdstate::svm
