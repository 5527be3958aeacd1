#pragma once

// Per-window feature extraction: 22 features on each gyroscope axis plus
// 3 cross-axis correlations, 69 values per sensor.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pdstate/matrix.hpp"
#include "pdstate/preprocess.hpp"
#include "pdstate/types.hpp"

namespace pdstate::features {

inline constexpr std::size_t kPerAxis = 22;
inline constexpr std::size_t kCrossAxis = 3;
inline constexpr std::size_t kPerSensor = 3 * kPerAxis + kCrossAxis;  // 69
inline constexpr int kRegistryVersion = 1;

struct FeatureDescriptor {
    int id = 0;          // 1..25, the feature kind
    std::string axis;    // "X", "Y", "Z" or "XY", "XZ", "YZ"
    std::string name;    // e.g. "band_power_4_6"
    std::string sensor;  // empty in the per-sensor registry

    /// "wrist.X.band_power_4_6"
    std::string key() const;
};

/** The 69 per-sensor descriptors: X features 1-22, Y 1-22, Z 1-22, then XY, XZ, YZ. */
const std::vector<FeatureDescriptor>& sensor_registry();

/** Combined registry for a sensor set, wrist block first. */
std::vector<FeatureDescriptor> registry_for(const std::vector<SensorId>& sensors);

struct HistogramSpec {
    double lo = -400.0;
    double hi = 400.0;
    std::size_t bins = 200;

    std::size_t bin_of(double v) const;
};

/// One-sided periodogram of an un-windowed segment; power sums to the mean square.
struct Periodogram {
    std::vector<double> power;  // bins 0..n/2
    double bin_hz = 0.0;

    double frequency(std::size_t k) const { return static_cast<double>(k) * bin_hz; }
};

Periodogram periodogram(std::span<const double> x, double sample_rate_hz);

/// Sum of periodogram power over bins with frequency in [lo, hi]. Empty bands give 0.
double band_power(const Periodogram& p, double lo_hz, double hi_hz);
/// Share of power strictly above `cutoff_hz`; 0 for a zero spectrum.
double high_freq_fraction(const Periodogram& p, double cutoff_hz = 4.0);
/// Shannon entropy (bits) of a power spectrum normalized to unit mass; 0 for a zero spectrum.
double spectral_entropy(std::span<const double> power);
inline double spectral_entropy(const Periodogram& p) { return spectral_entropy(p.power); }

struct PsdPeaks {
    double peak1 = 0.0, freq1 = 0.0;
    double peak2 = 0.0, freq2 = 0.0;
};
PsdPeaks psd_peaks(const Periodogram& p);

/// Signed mean of the second finite difference, scaled to deg/s^3.
double average_jerk(std::span<const double> x, double sample_rate_hz);

struct BasicStats {
    double std_dev = 0.0, peak_to_peak = 0.0, mean = 0.0, skewness = 0.0, kurtosis = 0.0;
};
/// Population moments; non-excess kurtosis. Skewness and kurtosis are 0 when the spread vanishes.
BasicStats basic_stats(std::span<const double> x);

struct AutocorrFeatures {
    double num_peaks = 0.0, sum_peaks = 0.0, first_peak_lag = 0.0, first_peak_value = 0.0;
};
/// Peaks of the mean-removed biased autocorrelation (lag 0 = 1) over lags 1..n-2.
AutocorrFeatures autocorr_features(std::span<const double> x);
std::vector<double> autocorrelation(std::span<const double> x);

double shannon_entropy(std::span<const double> x, const HistogramSpec& spec = {});
double gini_index(std::span<const double> x, const HistogramSpec& spec = {});

/**
 * Sample entropy -ln(M1/M2) with Chebyshev matching and tolerance
 * r = r_fraction * population std. Pairs j < k are counted over the first
 * n - m - 1 templates. Returns 0 when the spread vanishes and the cap
 * ln(n (n - 1)) when no length-(m+1) pair matches.
 */
double sample_entropy(std::span<const double> x, std::size_t m = 2, double r_fraction = 0.2);

/// Pearson correlation at lag 0; 0 if either side has no spread.
double cross_correlation(std::span<const double> a, std::span<const double> b);

/** Borrowed three-axis window. */
struct WindowView {
    SensorId sensor = SensorId::Wrist;
    std::span<const double> x, y, z;

    static WindowView of(const SignalWindow& w) { return {w.sensor, w.x, w.y, w.z}; }
};

struct FeatureVector {
    SensorId sensor = SensorId::Wrist;
    std::array<double, kPerSensor> values{};
    // Entries whose raw value was non-finite or undefined (0/0, e.g. skewness of a
    // constant axis); they hold 0 or the documented fallback.
    std::vector<std::size_t> flagged;
};

FeatureVector extract(const WindowView& window, double sample_rate_hz);
inline FeatureVector extract(const SignalWindow& window, double sample_rate_hz) {
    return extract(WindowView::of(window), sample_rate_hz);
}

struct FeatureMatrix {
    Matrix values;                   // rows = windows, cols = 69 * sensors
    std::vector<SensorId> sensors;   // column blocks, wrist first
    std::size_t flagged_entries = 0; // total flagged entries over all rows
};

/// Combines index-aligned window lists (one per sensor) into one matrix.
FeatureMatrix extract_matrix(const std::vector<std::vector<SignalWindow>>& windows, double sample_rate_hz,
                             unsigned jobs = 0);

/// Same as extract_matrix on segment(recording) without materializing the windows.
FeatureMatrix extract_recording(const Recording& filtered, const preprocess::WindowPlan& plan, unsigned jobs = 0);

}  // namespace pdstate::features
