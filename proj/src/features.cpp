#include "pdstate/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <utility>

#include "pdstate/simd/kernels.hpp"

namespace pdstate::features {

namespace {

constexpr std::array<const char*, kPerAxis> kAxisFeatureNames = {
    "band_power_1_4",        "band_power_4_6",           "band_power_0.5_15",       "high_freq_fraction",
    "spectral_entropy",      "psd_peak",                 "dominant_freq",           "psd_second_peak",
    "secondary_freq",        "average_jerk",             "std_dev",                 "peak_to_peak",
    "mean",                  "autocorr_num_peaks",       "autocorr_sum_peaks",      "autocorr_first_peak_lag",
    "autocorr_first_peak",   "skewness",                 "kurtosis",                "shannon_entropy",
    "gini_index",            "sample_entropy",
};

constexpr std::array<const char*, 3> kAxisNames = {"X", "Y", "Z"};
constexpr std::array<const char*, 3> kPairNames = {"XY", "XZ", "YZ"};

// A spread this small relative to the level is treated as zero.
bool negligible_spread(double std_dev, double mean) {
    return std_dev <= 1e-12 * std::max(1.0, std::fabs(mean));
}

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double population_std(std::span<const double> x, double mean) {
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<double> histogram_probabilities(std::span<const double> x, const HistogramSpec& spec) {
    std::vector<double> counts(spec.bins, 0.0);
    for (double v : x) counts[spec.bin_of(v)] += 1.0;
    for (double& c : counts) c /= static_cast<double>(x.size());
    return counts;
}

}  // namespace

std::string FeatureDescriptor::key() const {
    return sensor.empty() ? axis + "." + name : sensor + "." + axis + "." + name;
}

const std::vector<FeatureDescriptor>& sensor_registry() {
    static const std::vector<FeatureDescriptor> registry = [] {
        std::vector<FeatureDescriptor> r;
        for (const char* axis : kAxisNames)
            for (std::size_t f = 0; f < kPerAxis; ++f)
                r.push_back({static_cast<int>(f + 1), axis, kAxisFeatureNames[f], ""});
        for (std::size_t p = 0; p < kCrossAxis; ++p)
            r.push_back({static_cast<int>(kPerAxis + 1 + p), kPairNames[p], "cross_correlation", ""});
        return r;
    }();
    return registry;
}

std::vector<FeatureDescriptor> registry_for(const std::vector<SensorId>& sensors) {
    std::vector<SensorId> ordered = sensors;
    std::sort(ordered.begin(), ordered.end());
    std::vector<FeatureDescriptor> out;
    for (SensorId s : ordered)
        for (auto d : sensor_registry()) {
            d.sensor = std::string(to_string(s));
            out.push_back(std::move(d));
        }
    return out;
}

std::size_t HistogramSpec::bin_of(double v) const {
    const double pos = (v - lo) / (hi - lo) * static_cast<double>(bins);
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), bins - 1);
}

double band_power(const Periodogram& p, double lo_hz, double hi_hz) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.power.size(); ++k) {
        const double f = p.frequency(k);
        if (f >= lo_hz && f <= hi_hz) s += p.power[k];
    }
    return s;
}

double high_freq_fraction(const Periodogram& p, double cutoff_hz) {
    double total = 0.0, high = 0.0;
    for (std::size_t k = 0; k < p.power.size(); ++k) {
        total += p.power[k];
        if (p.frequency(k) > cutoff_hz) high += p.power[k];
    }
    return total > 0.0 ? high / total : 0.0;
}

double spectral_entropy(std::span<const double> power) {
    double total = 0.0;
    for (double v : power) total += v;
    if (!(total > 0.0)) return 0.0;
    double h = 0.0;
    for (double v : power) {
        if (v <= 0.0) continue;
        const double q = v / total;
        h -= q * std::log2(q);
    }
    return h;
}

PsdPeaks psd_peaks(const Periodogram& p) {
    PsdPeaks out;
    if (p.power.empty()) return out;
    const auto top = std::max_element(p.power.begin(), p.power.end());
    out.peak1 = *top;
    if (!(out.peak1 > 0.0)) return PsdPeaks{};
    const auto k1 = static_cast<std::size_t>(top - p.power.begin());
    out.freq1 = p.frequency(k1);

    // Local maxima below this level are rounding residue of an exact-bin tone.
    const double floor = 1e-12 * out.peak1;
    for (std::size_t k = 1; k + 1 < p.power.size(); ++k) {
        if (k + 1 >= k1 && k <= k1 + 1) continue;
        const double v = p.power[k];
        if (v > p.power[k - 1] && v > p.power[k + 1] && v > floor && v > out.peak2) {
            out.peak2 = v;
            out.freq2 = p.frequency(k);
        }
    }
    return out;
}

double average_jerk(std::span<const double> x, double sample_rate_hz) {
    if (x.size() < 3) throw std::invalid_argument("average jerk needs at least 3 samples");
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) s += x[i + 1] - 2.0 * x[i] + x[i - 1];
    return s / static_cast<double>(x.size() - 2) * sample_rate_hz * sample_rate_hz;
}

BasicStats basic_stats(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("basic stats need at least 2 samples");
    BasicStats s;
    s.mean = mean_of(x);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const auto n = static_cast<double>(x.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.std_dev = std::sqrt(m2);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    s.peak_to_peak = *hi - *lo;
    if (!negligible_spread(s.std_dev, s.mean)) {
        s.skewness = m3 / (m2 * s.std_dev);
        s.kurtosis = m4 / (m2 * m2);
    }
    return s;
}

std::vector<double> autocorrelation(std::span<const double> x) {
    const std::size_t n = x.size();
    const double mean = mean_of(x);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - mean;
    const std::span<const double> c(centered);
    std::vector<double> r(n, 0.0);
    const double r0 = simd::dot(c, c);
    if (negligible_spread(std::sqrt(r0 / static_cast<double>(n)), mean)) return r;
    r[0] = 1.0;
    for (std::size_t lag = 1; lag < n; ++lag) r[lag] = simd::dot(c.first(n - lag), c.subspan(lag)) / r0;
    return r;
}

AutocorrFeatures autocorr_features(std::span<const double> x) {
    if (x.size() < 4) throw std::invalid_argument("autocorrelation features need at least 4 samples");
    const auto r = autocorrelation(x);
    AutocorrFeatures out;
    if (r[0] == 0.0) return out;
    bool first = true;
    for (std::size_t lag = 1; lag + 1 < r.size(); ++lag) {
        if (r[lag] > r[lag - 1] && r[lag] > r[lag + 1]) {
            out.num_peaks += 1.0;
            out.sum_peaks += r[lag];
            if (first) {
                out.first_peak_lag = static_cast<double>(lag);
                out.first_peak_value = r[lag];
                first = false;
            }
        }
    }
    return out;
}

double shannon_entropy(std::span<const double> x, const HistogramSpec& spec) {
    if (x.empty()) return 0.0;
    double h = 0.0;
    for (double p : histogram_probabilities(x, spec))
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

double gini_index(std::span<const double> x, const HistogramSpec& spec) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double p : histogram_probabilities(x, spec)) s += p * p;
    return 1.0 - s;
}

double sample_entropy(std::span<const double> x, std::size_t m, double r_fraction) {
    const std::size_t n = x.size();
    if (n <= m + 1) throw std::invalid_argument("sample entropy needs more than m + 1 samples");
    const double mean = mean_of(x);
    const double sd = population_std(x, mean);
    if (negligible_spread(sd, mean)) return 0.0;
    const double r = r_fraction * sd;
    const auto counts = simd::count_template_matches(x, n - m - 1, m, r);
    if (counts.len_m_plus_1 == 0) return std::log(static_cast<double>(n) * static_cast<double>(n - 1));
    return -std::log(static_cast<double>(counts.len_m_plus_1) / static_cast<double>(counts.len_m));
}

double cross_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cross-correlation needs equal-length axes");
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    const auto n = static_cast<double>(a.size());
    if (negligible_spread(std::sqrt(saa / n), ma) || negligible_spread(std::sqrt(sbb / n), mb)) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

FeatureVector extract(const WindowView& window, double sample_rate_hz) {
    FeatureVector fv;
    fv.sensor = window.sensor;
    const std::array<std::span<const double>, 3> axes = {window.x, window.y, window.z};
    if (axes[1].size() != axes[0].size() || axes[2].size() != axes[0].size())
        throw std::invalid_argument("window axes differ in length");

    // Entries whose defining ratio is 0/0 hold their documented fallback and are flagged.
    std::array<bool, 3> flat{};
    auto flag = [&](std::size_t i) { fv.flagged.push_back(i); };
    for (std::size_t a = 0; a < 3; ++a) {
        const auto x = axes[a];
        double* out = fv.values.data() + a * kPerAxis;
        const Periodogram p = periodogram(x, sample_rate_hz);
        double total_power = 0.0;
        for (double v : p.power) total_power += v;
        if (!(total_power > 0.0)) {
            flag(a * kPerAxis + 3);
            flag(a * kPerAxis + 4);
        }
        out[0] = band_power(p, 1.0, 4.0);
        out[1] = band_power(p, 4.0, 6.0);
        out[2] = band_power(p, 0.5, 15.0);
        out[3] = high_freq_fraction(p);
        out[4] = spectral_entropy(p);
        const PsdPeaks peaks = psd_peaks(p);
        out[5] = peaks.peak1;
        out[6] = peaks.freq1;
        out[7] = peaks.peak2;
        out[8] = peaks.freq2;
        out[9] = average_jerk(x, sample_rate_hz);
        const BasicStats st = basic_stats(x);
        out[10] = st.std_dev;
        out[11] = st.peak_to_peak;
        out[12] = st.mean;
        const AutocorrFeatures ac = autocorr_features(x);
        out[13] = ac.num_peaks;
        out[14] = ac.sum_peaks;
        out[15] = ac.first_peak_lag;
        out[16] = ac.first_peak_value;
        out[17] = st.skewness;
        out[18] = st.kurtosis;
        out[19] = shannon_entropy(x);
        out[20] = gini_index(x);
        out[21] = sample_entropy(x);
        flat[a] = negligible_spread(st.std_dev, st.mean);
        if (flat[a])
            for (std::size_t f : {13, 14, 15, 16, 17, 18, 21}) flag(a * kPerAxis + f);
    }
    constexpr std::array<std::pair<std::size_t, std::size_t>, kCrossAxis> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
    for (std::size_t k = 0; k < kCrossAxis; ++k) {
        const auto [i, j] = pairs[k];
        fv.values[3 * kPerAxis + k] = cross_correlation(axes[i], axes[j]);
        if (flat[i] || flat[j]) flag(3 * kPerAxis + k);
    }

    for (std::size_t i = 0; i < fv.values.size(); ++i) {
        if (!std::isfinite(fv.values[i])) {
            fv.values[i] = 0.0;
            flag(i);
        }
    }
    std::sort(fv.flagged.begin(), fv.flagged.end());
    fv.flagged.erase(std::unique(fv.flagged.begin(), fv.flagged.end()), fv.flagged.end());
    return fv;
}

namespace {

template <typename RowFn>
std::size_t fill_rows(Matrix& m, std::size_t rows, unsigned jobs, RowFn&& row_fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(rows, 1)));
    std::vector<std::size_t> flagged(jobs, 0);
    auto work = [&](unsigned t) {
        for (std::size_t r = t; r < rows; r += jobs) flagged[t] += row_fn(r, m.row(r));
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t);
    }
    std::size_t total = 0;
    for (auto f : flagged) total += f;
    return total;
}

}  // namespace

FeatureMatrix extract_matrix(const std::vector<std::vector<SignalWindow>>& windows, double sample_rate_hz,
                             unsigned jobs) {
    FeatureMatrix fm;
    if (windows.empty()) return fm;
    const std::size_t rows = windows.front().size();
    for (const auto& list : windows) {
        if (list.size() != rows) throw std::invalid_argument("sensor window lists differ in length");
        if (!list.empty()) fm.sensors.push_back(list.front().sensor);
    }
    for (std::size_t r = 0; r < rows; ++r)
        for (const auto& list : windows)
            if (list[r].start_sample != windows.front()[r].start_sample)
                throw std::invalid_argument("misaligned sensor windows at row " + std::to_string(r));
    for (std::size_t i = 1; i < fm.sensors.size(); ++i)
        if (fm.sensors[i] <= fm.sensors[i - 1])
            throw std::invalid_argument("sensor window lists must be ordered wrist first without repeats");

    fm.values = Matrix(rows, kPerSensor * windows.size());
    fm.flagged_entries = fill_rows(fm.values, rows, jobs, [&](std::size_t r, std::span<double> out) {
        std::size_t flagged = 0;
        for (std::size_t s = 0; s < windows.size(); ++s) {
            const FeatureVector fv = extract(windows[s][r], sample_rate_hz);
            std::copy(fv.values.begin(), fv.values.end(), out.begin() + static_cast<std::ptrdiff_t>(s * kPerSensor));
            flagged += fv.flagged.size();
        }
        return flagged;
    });
    return fm;
}

FeatureMatrix extract_recording(const Recording& filtered, const preprocess::WindowPlan& plan, unsigned jobs) {
    FeatureMatrix fm;
    fm.sensors = filtered.sensor_ids();
    const std::size_t rows = plan.windows.size();
    const std::size_t w = plan.window_samples;
    fm.values = Matrix(rows, kPerSensor * fm.sensors.size());
    fm.flagged_entries = fill_rows(fm.values, rows, jobs, [&](std::size_t r, std::span<double> out) {
        std::size_t flagged = 0;
        const std::size_t start = plan.windows[r].start_sample;
        for (std::size_t s = 0; s < filtered.streams().size(); ++s) {
            const auto& st = filtered.streams()[s];
            const WindowView view{st.id, std::span<const double>(st.x).subspan(start, w),
                                  std::span<const double>(st.y).subspan(start, w),
                                  std::span<const double>(st.z).subspan(start, w)};
            const FeatureVector fv = extract(view, filtered.sample_rate_hz());
            std::copy(fv.values.begin(), fv.values.end(), out.begin() + static_cast<std::ptrdiff_t>(s * kPerSensor));
            flagged += fv.flagged.size();
        }
        return flagged;
    });
    return fm;
}

}  // namespace pdstate::features
