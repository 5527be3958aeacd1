#pragma once

// Band-pass filtering and overlapping segmentation of gyroscope streams.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdstate/types.hpp"

namespace pdstate::preprocess {

/** Raised when a filter design cannot meet its magnitude-response contract. */
class FilterDesignError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/** Linear-phase FIR filter. `coefficients.size() == order + 1`. */
struct FirFilter {
    std::vector<double> coefficients;
    std::size_t order = 0;
    double low_hz = 0.0;
    double high_hz = 0.0;
    double sample_rate_hz = 0.0;

    std::complex<double> response(double freq_hz) const;
    /// 20 log10 |H(f)|
    double gain_db(double freq_hz) const;
};

/**
 * Hamming-windowed sinc band-pass.
 *
 * The design must keep >= -1 dB over [2 low, 2/3 high] and reach <= -20 dB at
 * low/10 and at 2 high (when below Nyquist); for the default 0.5-15 Hz band at
 * 128 Hz that is [1, 10] Hz pass, 0.05 Hz and 30 Hz stop. Throws
 * FilterDesignError naming the achieved figures otherwise.
 */
FirFilter design_bandpass(double low_hz, double high_hz, double sample_rate_hz, std::size_t order = 512);

/// Default front-end filter: 0.5-15 Hz at the recording's sample rate.
FirFilter default_bandpass(double sample_rate_hz);

/**
 * Zero-delay filtering of one channel: reflect-pad by order/2 on both ends,
 * convolve, and return the group-delay-compensated output of the same length.
 */
std::vector<double> filter_signal(const FirFilter& filter, std::span<const double> signal);

SensorStream filter_stream(const FirFilter& filter, const SensorStream& stream);
Recording filter_recording(const FirFilter& filter, const Recording& recording);

struct SegmentOptions {
    double window_s = 5.0;
    double overlap_s = 4.0;
};

/** Placement and majority labels of one window, shared by every sensor. */
struct WindowInfo {
    std::size_t start_sample = 0;
    std::optional<MedState> label;
    std::optional<Activity> activity;
};

struct WindowPlan {
    std::size_t window_samples = 0;
    std::size_t hop_samples = 0;
    std::vector<WindowInfo> windows;
};

/// Window placement and labels without copying samples.
WindowPlan plan_windows(const Recording& recording, const SegmentOptions& options = {});

/// Materialized windows, one list per sensor in recording order; lists are index-aligned.
std::vector<std::vector<SignalWindow>> segment(const Recording& recording, const SegmentOptions& options = {});

}  // namespace pdstate::preprocess
