#include "pdstate/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace pdstate::simd {

namespace {

Isa probe() {
#if defined(PDSTATE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
    return Isa::Scalar;
}

// PDSTATE_SIMD=scalar forces the reference kernels at startup.
Isa initial() {
    const Isa best = probe();
    if (const char* env = std::getenv("PDSTATE_SIMD"); env && std::string(env) == "scalar") return Isa::Scalar;
    return best;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
    static const Isa best = probe();
    return best;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
    if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
    active().store(isa, std::memory_order_relaxed);
    return isa;
}

double dot(std::span<const double> a, std::span<const double> b) {
    return active_isa() == Isa::Avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    return active_isa() == Isa::Avx2 ? avx2::squared_distance(a, b) : scalar::squared_distance(a, b);
}

TemplateMatches count_template_matches(std::span<const double> x, std::size_t templates, std::size_t m,
                                       double r) {
    return active_isa() == Isa::Avx2 ? avx2::count_template_matches(x, templates, m, r)
                                     : scalar::count_template_matches(x, templates, m, r);
}

}  // namespace pdstate::simd
