#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "oracles.hpp"
#include "pdstate/preprocess.hpp"
#include "test_support.hpp"

using namespace pdstate;
using namespace pdstate::preprocess;
using testsupport::gaussian;
using testsupport::sine;

namespace {

// Oracle magnitude response computed straight from the taps.
double magnitude(const std::vector<double>& h, double f, double fs) {
    std::complex<double> acc = 0;
    for (std::size_t n = 0; n < h.size(); ++n)
        acc += h[n] * std::exp(std::complex<double>(0, -2 * std::numbers::pi * f / fs * static_cast<double>(n)));
    return std::abs(acc);
}

double steady_amplitude(const std::vector<double>& y, std::size_t skip) {
    double peak = 0;
    for (std::size_t i = skip; i + skip < y.size(); ++i) peak = std::max(peak, std::fabs(y[i]));
    return peak;
}

Recording labeled(std::size_t n, std::size_t off_until) {
    std::vector<MedState> truth(n, MedState::On);
    std::fill(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(off_until), MedState::Off);
    std::vector<Activity> act(n, Activity::Walking);
    std::fill(act.begin(), act.begin() + static_cast<std::ptrdiff_t>(off_until), Activity::Drinking);
    return Recording(128.0, {{SensorId::Wrist, gaussian(n, 1), gaussian(n, 2), gaussian(n, 3)}}, truth, act);
}

}  // namespace

TEST(Filter, MeetsResponseContract) {
    const FirFilter f = default_bandpass(128.0);
    EXPECT_EQ(f.order, 512u);
    EXPECT_EQ(f.coefficients.size(), 513u);
    for (double hz = 1.0; hz <= 10.0; hz += 0.05) EXPECT_GE(20 * std::log10(magnitude(f.coefficients, hz, 128)), -1.0);
    EXPECT_LE(20 * std::log10(magnitude(f.coefficients, 0.05, 128)), -20.0);
    EXPECT_LE(20 * std::log10(magnitude(f.coefficients, 30.0, 128)), -20.0);
    EXPECT_NEAR(f.gain_db(5.0), 20 * std::log10(magnitude(f.coefficients, 5.0, 128)), 1e-9);
}

TEST(Filter, LinearPhaseAndDcRejection) {
    const FirFilter f = default_bandpass(128.0);
    double sum = 0;
    for (std::size_t n = 0; n <= f.order; ++n) {
        EXPECT_NEAR(f.coefficients[n], f.coefficients[f.order - n], 1e-12);
        sum += f.coefficients[n];
    }
    EXPECT_NEAR(sum, 0.0, 1e-6);
}

TEST(Filter, DesignErrors) {
    EXPECT_THROW(design_bandpass(0.0, 15.0, 128.0), FilterDesignError);
    EXPECT_THROW(design_bandpass(16.0, 15.0, 128.0), FilterDesignError);
    EXPECT_THROW(design_bandpass(0.5, 70.0, 128.0), FilterDesignError);
    EXPECT_THROW(design_bandpass(0.5, 15.0, 128.0, 511), FilterDesignError);
    try {
        design_bandpass(0.5, 15.0, 128.0, 32);
        FAIL() << "order 32 cannot reach the stopband at 0.05 Hz";
    } catch (const FilterDesignError& e) {
        EXPECT_NE(std::string(e.what()).find("dB"), std::string::npos);
    }
}

TEST(Filter, ConstantInputIsRemoved) {
    const FirFilter f = default_bandpass(128.0);
    const std::vector<double> x(4096, 250.0);
    const auto y = filter_signal(f, x);
    for (std::size_t i = 512; i + 512 < y.size(); ++i) EXPECT_LT(std::fabs(y[i]), 1e-3 * 250.0);
}

TEST(Filter, FiveHertzPassesFortyHertzStops) {
    const FirFilter f = default_bandpass(128.0);
    const auto y5 = filter_signal(f, sine(4096, 5.0, 100.0));
    const double want = 100.0 * magnitude(f.coefficients, 5.0, 128);
    EXPECT_NEAR(steady_amplitude(y5, 600), want, 0.5);
    EXPECT_NEAR(steady_amplitude(y5, 600), 100.0, 5.0);
    const auto y40 = filter_signal(f, sine(4096, 40.0, 100.0));
    EXPECT_LE(steady_amplitude(y40, 600), 10.0);
}

TEST(Filter, MatchesDirectConvolution) {
    const FirFilter f = default_bandpass(128.0);
    const auto x = gaussian(1500, 9, 30.0);
    const auto y = filter_signal(f, x);
    const long half = static_cast<long>(f.order / 2);
    const long n = static_cast<long>(x.size());
    for (long i : {0L, 1L, 200L, 700L, 1300L, 1499L}) {
        long double acc = 0;
        for (long k = 0; k <= 2 * half; ++k) {
            long src = i + k - half;
            if (src < 0) src = -src;
            if (src >= n) src = 2 * (n - 1) - src;
            acc += f.coefficients[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(src)];
        }
        EXPECT_NEAR(y[static_cast<std::size_t>(i)], static_cast<double>(acc), 1e-9);
    }
}

TEST(Filter, WhiteNoiseStopbandAttenuation) {
    const FirFilter f = default_bandpass(128.0);
    const auto x = gaussian(4096, 11, 10.0);
    const auto y = filter_signal(f, x);
    // Skip the reflected edges so the comparison is on steady-state output.
    const std::vector<double> xi(x.begin() + 1024, x.end() - 1024), yi(y.begin() + 1024, y.end() - 1024);
    const auto px = oracle::periodogram(xi), py = oracle::periodogram(yi);
    const double bin = 128.0 / static_cast<double>(xi.size());
    const double in_hi = oracle::band_power(px, bin, 30.0, 64.0), out_hi = oracle::band_power(py, bin, 30.0, 64.0);
    const double in_lo = oracle::band_power(px, bin, 0.0, 0.05), out_lo = oracle::band_power(py, bin, 0.0, 0.05);
    EXPECT_LE(10 * std::log10(out_hi / in_hi), -20.0);
    EXPECT_LE(10 * std::log10(out_lo / in_lo), -20.0);
}

TEST(Filter, ZeroInZeroOut) {
    const auto y = filter_signal(default_bandpass(128.0), std::vector<double>(2000, 0.0));
    EXPECT_TRUE(std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; }));
}

TEST(Filter, ImpulseResponseIsCentered) {
    std::vector<double> x(3001, 0.0);
    x[1500] = 1.0;
    const auto y = filter_signal(default_bandpass(128.0), x);
    for (std::size_t k = 1; k < 600; ++k) EXPECT_NEAR(y[1500 - k], y[1500 + k], 1e-15);
    const auto peak = std::max_element(y.begin(), y.end());
    EXPECT_EQ(peak - y.begin(), 1500);
}

TEST(Filter, ShortStreamIsAnError) {
    EXPECT_THROW(filter_signal(default_bandpass(128.0), std::vector<double>(513, 1.0)), std::invalid_argument);
}

TEST(Filter, AxesAreFilteredIndependently) {
    const FirFilter f = default_bandpass(128.0);
    const SensorStream s{SensorId::Ankle, gaussian(1200, 1), sine(1200, 5, 10), gaussian(1200, 3)};
    const auto out = filter_stream(f, s);
    EXPECT_EQ(out.id, SensorId::Ankle);
    EXPECT_EQ(out.x, filter_signal(f, s.x));
    EXPECT_EQ(out.y, filter_signal(f, s.y));
    EXPECT_EQ(out.z, filter_signal(f, s.z));
}

TEST(Segment, WindowCounts) {
    EXPECT_EQ(plan_windows(testsupport::noise_recording(1280, 1)).windows.size(), 6u);
    EXPECT_EQ(plan_windows(testsupport::noise_recording(640, 1)).windows.size(), 1u);
    for (std::size_t n : {640u, 641u, 767u, 768u, 5000u, 12345u}) {
        const auto plan = plan_windows(testsupport::noise_recording(n, 2, true));
        EXPECT_EQ(plan.windows.size(), (n - 640) / 128 + 1) << n;
        EXPECT_EQ(plan.window_samples, 640u);
        EXPECT_EQ(plan.hop_samples, 128u);
    }
}

TEST(Segment, TooShortRecording) {
    try {
        plan_windows(testsupport::noise_recording(639, 1));
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("too short"), std::string::npos);
    }
    EXPECT_THROW(plan_windows(testsupport::noise_recording(1000, 1), {5.0, 5.0}), std::invalid_argument);
}

TEST(Segment, MajorityLabelAcrossBoundary) {
    // 3 s OFF then 2 s ON inside the only window.
    const auto plan = plan_windows(labeled(640, 384));
    ASSERT_EQ(plan.windows.size(), 1u);
    EXPECT_EQ(plan.windows[0].label, MedState::Off);
    EXPECT_EQ(plan.windows[0].activity, Activity::Drinking);
    // 2 s OFF then 3 s ON.
    EXPECT_EQ(plan_windows(labeled(640, 256)).windows[0].label, MedState::On);
}

TEST(Segment, ExactTieResolvesToOff) {
    EXPECT_EQ(plan_windows(labeled(640, 320)).windows[0].label, MedState::Off);
}

TEST(Segment, WindowsAreAlignedAndCoverTheRecording) {
    const Recording r = testsupport::noise_recording(3000, 4);
    const auto lists = segment(r);
    ASSERT_EQ(lists.size(), 2u);
    ASSERT_EQ(lists[0].size(), lists[1].size());
    std::vector<bool> covered(r.length_samples(), false);
    for (std::size_t w = 0; w < lists[0].size(); ++w) {
        EXPECT_EQ(lists[0][w].start_sample, lists[1][w].start_sample);
        EXPECT_EQ(lists[0][w].sensor, SensorId::Wrist);
        EXPECT_EQ(lists[1][w].sensor, SensorId::Ankle);
        EXPECT_EQ(lists[0][w].size(), 640u);
        for (std::size_t i = 0; i < 640; ++i) {
            covered[lists[0][w].start_sample + i] = true;
            EXPECT_EQ(lists[1][w].z[i], r.stream(SensorId::Ankle).z[lists[1][w].start_sample + i]);
        }
    }
    const std::size_t last_end = lists[0].back().start_sample + 640;
    for (std::size_t i = 0; i < r.length_samples(); ++i) EXPECT_EQ(covered[i], i < last_end) << i;
    EXPECT_GT(last_end + 128, r.length_samples());
}

TEST(Segment, FilterThenSegmentEqualsSegmentOfFilteredStream) {
    const Recording r = testsupport::noise_recording(2000, 5);
    const FirFilter f = default_bandpass(128.0);
    const auto windows = segment(filter_recording(f, r));
    const auto filtered_x = filter_signal(f, r.stream(SensorId::Wrist).x);
    for (const auto& w : windows[0])
        for (std::size_t i = 0; i < w.size(); ++i) ASSERT_EQ(w.x[i], filtered_x[w.start_sample + i]);
}
