#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pdstate/calibrate.hpp"
#include "pdstate/matrix.hpp"
#include "pdstate/svm.hpp"
#include "pdstate/types.hpp"

namespace pdstate {

inline constexpr int kModelFormatVersion = 1;

/**
 * Everything needed to turn a recording into a state report: sensor set,
 * retained feature columns with their z-score parameters, the trained SVM,
 * and the certainty calibration.
 */
struct SvmModel {
    double sample_rate_hz = 128.0;
    std::vector<SensorId> sensors;             // wrist first
    std::vector<std::size_t> feature_indices;  // columns of the combined feature space of `sensors`
    std::vector<std::string> feature_keys;     // registry keys, informational
    svm::Standardizer normalization;           // one entry per retained feature
    svm::TrainedSvm svm;                       // operates on normalized retained features
    calibrate::PlattParams platt;
    double certainty_threshold = 0.5;

    /// Throws InvariantError when any invariant is violated.
    void validate() const;

    /// Decision values for rows of the full (unmasked, unnormalized) feature matrix.
    std::vector<double> decision_values(const Matrix& full_features) const;
};

}  // namespace pdstate
