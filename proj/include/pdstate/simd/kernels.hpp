#pragma once

// Data-parallel inner loops used by the filter, feature and SVM stages.
//
// Every kernel has a scalar reference in `scalar::` and, on x86-64, an AVX2
// variant in `avx2::`. The unqualified entry points dispatch at runtime to the
// best variant the CPU supports. Results of the two variants agree exactly for
// the counting kernels and to summation-order rounding for the reductions.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace pdstate::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best ISA supported by the running CPU (ignores any override).
Isa detected_isa();
/// ISA currently used by the dispatching entry points.
Isa active_isa();
/// Pin dispatch to `isa`; falls back to scalar if the CPU lacks it. Returns the ISA in effect.
Isa set_active_isa(Isa isa);

struct TemplateMatches {
    std::uint64_t len_m = 0;         // pairs whose length-m templates match
    std::uint64_t len_m_plus_1 = 0;  // pairs whose length-(m+1) templates match
};

// sum_i a[i] * b[i]; a and b must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

// sum_i (a[i] - b[i])^2
double squared_distance(std::span<const double> a, std::span<const double> b);

/**
 * Template match counts for sample entropy.
 *
 * Considers templates starting at 0..templates-1 and counts unordered pairs
 * (j < k) whose length-m and length-(m+1) templates lie within Chebyshev
 * distance strictly less than r. Requires templates + m <= x.size().
 */
TemplateMatches count_template_matches(std::span<const double> x, std::size_t templates, std::size_t m,
                                       double r);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
TemplateMatches count_template_matches(std::span<const double> x, std::size_t templates, std::size_t m,
                                       double r);
}  // namespace scalar

namespace avx2 {
bool compiled();
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
TemplateMatches count_template_matches(std::span<const double> x, std::size_t templates, std::size_t m,
                                       double r);
}  // namespace avx2

}  // namespace pdstate::simd
