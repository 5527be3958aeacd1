#include "pdstate/simd/kernels.hpp"

#if defined(PDSTATE_HAVE_AVX2)

#include <immintrin.h>

#include <bit>
#include <cmath>

namespace pdstate::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

}  // namespace

bool compiled() { return true; }

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const double* pa = a.data();
    const double* pb = b.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += pa[i] * pb[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const double* pa = a.data();
    const double* pb = b.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = pa[i] - pb[i];
        s += d * d;
    }
    return s;
}

TemplateMatches count_template_matches(std::span<const double> x, std::size_t templates, std::size_t m,
                                       double r) {
    TemplateMatches out;
    const double* p = x.data();
    const __m256d rv = _mm256_set1_pd(r);
    for (std::size_t j = 0; j < templates; ++j) {
        std::size_t k = j + 1;
        for (; k + 4 <= templates; k += 4) {
            __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
            for (std::size_t t = 0; t < m; ++t) {
                const __m256d d = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(p + k + t), _mm256_set1_pd(p[j + t])));
                mask = _mm256_and_pd(mask, _mm256_cmp_pd(d, rv, _CMP_LT_OQ));
            }
            const int bits_m = _mm256_movemask_pd(mask);
            if (bits_m == 0) continue;
            const __m256d d = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(p + k + m), _mm256_set1_pd(p[j + m])));
            const int bits_m1 = _mm256_movemask_pd(_mm256_and_pd(mask, _mm256_cmp_pd(d, rv, _CMP_LT_OQ)));
            out.len_m += static_cast<unsigned>(std::popcount(static_cast<unsigned>(bits_m)));
            out.len_m_plus_1 += static_cast<unsigned>(std::popcount(static_cast<unsigned>(bits_m1)));
        }
        for (; k < templates; ++k) {
            bool match = true;
            for (std::size_t t = 0; t < m && match; ++t) match = std::fabs(p[j + t] - p[k + t]) < r;
            if (!match) continue;
            ++out.len_m;
            if (std::fabs(p[j + m] - p[k + m]) < r) ++out.len_m_plus_1;
        }
    }
    return out;
}

}  // namespace pdstate::simd::avx2

#else

#include <stdexcept>

namespace pdstate::simd::avx2 {

bool compiled() { return false; }

double dot(std::span<const double>, std::span<const double>) {
    throw std::logic_error("AVX2 kernels not compiled for this target");
}
double squared_distance(std::span<const double>, std::span<const double>) {
    throw std::logic_error("AVX2 kernels not compiled for this target");
}
TemplateMatches count_template_matches(std::span<const double>, std::size_t, std::size_t, double) {
    throw std::logic_error("AVX2 kernels not compiled for this target");
}

}  // namespace pdstate::simd::avx2

#endif
