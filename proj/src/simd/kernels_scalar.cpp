#include "pdstate/simd/kernels.hpp"

#include <cmath>

namespace pdstate::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

TemplateMatches count_template_matches(std::span<const double> x, std::size_t templates, std::size_t m,
                                       double r) {
    TemplateMatches out;
    for (std::size_t j = 0; j < templates; ++j) {
        for (std::size_t k = j + 1; k < templates; ++k) {
            bool match = true;
            for (std::size_t t = 0; t < m && match; ++t) match = std::fabs(x[j + t] - x[k + t]) < r;
            if (!match) continue;
            ++out.len_m;
            if (std::fabs(x[j + m] - x[k + m]) < r) ++out.len_m_plus_1;
        }
    }
    return out;
}

}  // namespace pdstate::simd::scalar
