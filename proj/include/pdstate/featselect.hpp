#pragma once

// Univariate screening of training features between the ON and OFF classes.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pdstate/matrix.hpp"

namespace pdstate::featselect {

inline constexpr double kSignificance = 0.05;

struct AndersonDarling {
    double statistic = 0.0;  // small-sample corrected A*^2
    bool is_normal = false;  // statistic < 0.752
};

/// Normality test against a normal with estimated mean and variance. Requires n >= 8.
AndersonDarling anderson_darling(std::span<const double> samples);

/// Two-sided pooled-variance two-sample t-test.
double t_test_unpaired(std::span<const double> a, std::span<const double> b);

/**
 * Two-sided Wilcoxon rank-sum test. Exact enumeration of the (mid)rank-sum
 * distribution for n_a + n_b <= 20, otherwise the normal approximation with
 * tie and continuity corrections.
 */
double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

enum class TestUsed { TTest, RankSum };

struct FeatureScreen {
    bool normal_on = false;
    bool normal_off = false;
    TestUsed test = TestUsed::RankSum;
    double p_value = 1.0;
    bool selected = false;
};

struct ScreenResult {
    std::vector<FeatureScreen> features;
    bool used_fallback = false;  // nothing passed; the lowest-p features were kept

    std::vector<std::size_t> selected_indices() const;
};

/**
 * Screens every column of `features` with labels in {+1 (OFF), -1 (ON)}:
 * t-test when both classes pass Anderson-Darling, rank-sum otherwise, keep
 * p < 0.05. If nothing passes, the `fallback_count` lowest-p columns are kept.
 */
ScreenResult screen(const Matrix& features, std::span<const double> labels, std::size_t fallback_count = 10);

/// JSON array of {index, key, p_value, test, selected, normal_on, normal_off}.
std::string screen_to_json(const ScreenResult& result, const std::vector<std::string>& feature_keys);

}  // namespace pdstate::featselect
