#include "pdstate/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pdstate/simd/kernels.hpp"

namespace pdstate::preprocess {

namespace {

// Hamming-windowed sinc low-pass, scaled to unit DC gain.
std::vector<double> windowed_lowpass(double cutoff_cycles_per_sample, std::size_t order) {
    const double center = static_cast<double>(order) / 2.0;
    std::vector<double> h(order + 1);
    double sum = 0.0;
    for (std::size_t n = 0; n <= order; ++n) {
        const double t = static_cast<double>(n) - center;
        const double arg = 2.0 * cutoff_cycles_per_sample * t;
        const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
        const double window =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(order));
        h[n] = 2.0 * cutoff_cycles_per_sample * sinc * window;
        sum += h[n];
    }
    for (double& v : h) v /= sum;
    return h;
}

}  // namespace

std::complex<double> FirFilter::response(double freq_hz) const {
    std::complex<double> acc{0.0, 0.0};
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    for (std::size_t n = 0; n < coefficients.size(); ++n)
        acc += coefficients[n] * std::polar(1.0, -w * static_cast<double>(n));
    return acc;
}

double FirFilter::gain_db(double freq_hz) const {
    return 20.0 * std::log10(std::max(std::abs(response(freq_hz)), 1e-300));
}

FirFilter design_bandpass(double low_hz, double high_hz, double sample_rate_hz, std::size_t order) {
    if (!(sample_rate_hz > 0.0)) throw FilterDesignError("sample rate must be positive");
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0))
        throw FilterDesignError("band edges must satisfy 0 < low < high < fs/2");
    if (order < 2 || order % 2 != 0) throw FilterDesignError("filter order must be even and >= 2");

    const auto hi = windowed_lowpass(high_hz / sample_rate_hz, order);
    const auto lo = windowed_lowpass(low_hz / sample_rate_hz, order);
    FirFilter f;
    f.order = order;
    f.low_hz = low_hz;
    f.high_hz = high_hz;
    f.sample_rate_hz = sample_rate_hz;
    f.coefficients.resize(order + 1);
    for (std::size_t n = 0; n <= order; ++n) f.coefficients[n] = hi[n] - lo[n];
    // Enforce exact symmetry; the two halves differ only by rounding in sin().
    for (std::size_t n = 0; n < order / 2; ++n) {
        const double avg = 0.5 * (f.coefficients[n] + f.coefficients[order - n]);
        f.coefficients[n] = f.coefficients[order - n] = avg;
    }

    const double pass_lo = 2.0 * low_hz;
    const double pass_hi = 2.0 * high_hz / 3.0;
    double worst_pass = 0.0;
    if (pass_lo < pass_hi) {
        const int steps = 200;
        worst_pass = 1e300;
        for (int i = 0; i <= steps; ++i)
            worst_pass = std::min(worst_pass, f.gain_db(pass_lo + (pass_hi - pass_lo) * i / steps));
    }
    double worst_stop = f.gain_db(low_hz / 10.0);
    if (2.0 * high_hz < sample_rate_hz / 2.0) worst_stop = std::max(worst_stop, f.gain_db(2.0 * high_hz));
    if (worst_pass < -1.0 || worst_stop > -20.0) {
        std::ostringstream msg;
        msg << "order " << order << " too small for the band-pass response: passband minimum " << worst_pass
            << " dB (need >= -1), stopband maximum " << worst_stop << " dB (need <= -20)";
        throw FilterDesignError(msg.str());
    }
    return f;
}

FirFilter default_bandpass(double sample_rate_hz) { return design_bandpass(0.5, 15.0, sample_rate_hz, 512); }

std::vector<double> filter_signal(const FirFilter& filter, std::span<const double> signal) {
    const std::size_t n = signal.size();
    const std::size_t taps = filter.coefficients.size();
    if (n <= taps)
        throw std::invalid_argument("signal of " + std::to_string(n) + " samples is not longer than the " +
                                    std::to_string(taps) + "-tap filter");
    const std::size_t half = filter.order / 2;

    std::vector<double> padded(n + 2 * half);
    for (std::size_t i = 0; i < padded.size(); ++i) {
        const auto idx = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(half);
        std::ptrdiff_t src = idx;
        if (src < 0) src = -src;
        if (src >= static_cast<std::ptrdiff_t>(n)) src = 2 * static_cast<std::ptrdiff_t>(n - 1) - src;
        padded[i] = signal[static_cast<std::size_t>(src)];
    }

    // Symmetric taps: convolution equals correlation, and output sample i is
    // centered on input sample i.
    std::vector<double> out(n);
    const std::span<const double> h(filter.coefficients);
    for (std::size_t i = 0; i < n; ++i) out[i] = simd::dot(h, std::span<const double>(padded).subspan(i, taps));
    return out;
}

SensorStream filter_stream(const FirFilter& filter, const SensorStream& stream) {
    SensorStream out;
    out.id = stream.id;
    out.x = filter_signal(filter, stream.x);
    out.y = filter_signal(filter, stream.y);
    out.z = filter_signal(filter, stream.z);
    return out;
}

Recording filter_recording(const FirFilter& filter, const Recording& recording) {
    std::vector<SensorStream> streams;
    for (const auto& s : recording.streams()) streams.push_back(filter_stream(filter, s));
    return recording.with_streams(std::move(streams));
}

WindowPlan plan_windows(const Recording& recording, const SegmentOptions& options) {
    if (!(options.window_s > options.overlap_s) || options.overlap_s < 0.0)
        throw std::invalid_argument("window length must exceed overlap");
    const double fs = recording.sample_rate_hz();
    WindowPlan plan;
    plan.window_samples = window_samples_for(fs, options.window_s);
    plan.hop_samples = window_samples_for(fs, options.window_s - options.overlap_s);
    if (plan.hop_samples == 0) throw std::invalid_argument("hop rounds to zero samples");
    const std::size_t n = recording.length_samples();
    if (n < plan.window_samples)
        throw std::invalid_argument("recording too short: " + std::to_string(n) + " samples, window needs " +
                                    std::to_string(plan.window_samples));
    const std::size_t count = (n - plan.window_samples) / plan.hop_samples + 1;

    // Prefix counts make majority labels O(1) per window.
    std::vector<std::size_t> off_prefix;
    if (const auto& truth = recording.truth()) {
        off_prefix.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) off_prefix[i + 1] = off_prefix[i] + ((*truth)[i] == MedState::Off);
    }
    std::vector<std::array<std::size_t, kActivityCount>> act_prefix;
    if (const auto& act = recording.activity()) {
        act_prefix.assign(n + 1, {});
        for (std::size_t i = 0; i < n; ++i) {
            act_prefix[i + 1] = act_prefix[i];
            ++act_prefix[i + 1][static_cast<std::size_t>((*act)[i])];
        }
    }

    plan.windows.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        WindowInfo info;
        info.start_sample = w * plan.hop_samples;
        const std::size_t end = info.start_sample + plan.window_samples;
        if (!off_prefix.empty()) {
            const std::size_t off = off_prefix[end] - off_prefix[info.start_sample];
            // Exact ties resolve to OFF.
            info.label = 2 * off >= plan.window_samples ? MedState::Off : MedState::On;
        }
        if (!act_prefix.empty()) {
            std::size_t best = 0, best_count = 0;
            for (std::size_t a = 0; a < kActivityCount; ++a) {
                const std::size_t c = act_prefix[end][a] - act_prefix[info.start_sample][a];
                if (c > best_count) {
                    best = a;
                    best_count = c;
                }
            }
            info.activity = static_cast<Activity>(best);
        }
        plan.windows.push_back(info);
    }
    return plan;
}

std::vector<std::vector<SignalWindow>> segment(const Recording& recording, const SegmentOptions& options) {
    const WindowPlan plan = plan_windows(recording, options);
    std::vector<std::vector<SignalWindow>> out;
    for (const auto& stream : recording.streams()) {
        std::vector<SignalWindow> windows;
        windows.reserve(plan.windows.size());
        for (const auto& info : plan.windows) {
            SignalWindow w;
            w.sensor = stream.id;
            w.start_sample = info.start_sample;
            w.label = info.label;
            w.activity = info.activity;
            const auto first = static_cast<std::ptrdiff_t>(info.start_sample);
            const auto last = first + static_cast<std::ptrdiff_t>(plan.window_samples);
            w.x.assign(stream.x.begin() + first, stream.x.begin() + last);
            w.y.assign(stream.y.begin() + first, stream.y.begin() + last);
            w.z.assign(stream.z.begin() + first, stream.z.begin() + last);
            windows.push_back(std::move(w));
        }
        out.push_back(std::move(windows));
    }
    return out;
}

}  // namespace pdstate::preprocess
