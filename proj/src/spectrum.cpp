#include <complex>
#include <vector>

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "pdstate/features.hpp"

namespace pdstate::features {

namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are cached per length and never destroyed while in use.
fftw_plan plan_for(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, PlanHandle> plans;
    std::lock_guard lock(mutex);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second.get();
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans.emplace(n, PlanHandle(p));
    return p;
}

}  // namespace

Periodogram periodogram(std::span<const double> x, double sample_rate_hz) {
    const std::size_t n = x.size();
    Periodogram p;
    if (n == 0) return p;
    p.bin_hz = sample_rate_hz / static_cast<double>(n);
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> spectrum(n / 2 + 1);
    fftw_execute_dft_r2c(plan_for(n), in.data(), reinterpret_cast<fftw_complex*>(spectrum.data()));

    const double denom = static_cast<double>(n) * static_cast<double>(n);
    p.power.resize(n / 2 + 1);
    for (std::size_t k = 0; k < p.power.size(); ++k) {
        const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
        p.power[k] = (unpaired ? 1.0 : 2.0) * std::norm(spectrum[k]) / denom;
    }
    return p;
}

}  // namespace pdstate::features
