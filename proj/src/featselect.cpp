#include "pdstate/featselect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

namespace pdstate::featselect {

namespace {

// log of the standard normal CDF, usable deep into the lower tail.
double log_normal_cdf(double z) {
    const double p = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    return std::log(std::max(p, std::numeric_limits<double>::min()));
}

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sum_sq_dev(std::span<const double> x, double mean) {
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s;
}

// Midranks (1-based) of the pooled sample, doubled so ties stay integral.
std::vector<long> doubled_midranks(std::span<const double> pooled, std::vector<long>& tie_sizes) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<long> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // ranks i+1..j+1 share (i+1 + j+1)/2; doubled: i + j + 2
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = static_cast<long>(i + j + 2);
        tie_sizes.push_back(static_cast<long>(j - i + 1));
        i = j + 1;
    }
    return ranks;
}

}  // namespace

AndersonDarling anderson_darling(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 8) throw std::invalid_argument("Anderson-Darling needs at least 8 samples");
    const double mean = mean_of(samples);
    const double sd = std::sqrt(sum_sq_dev(samples, mean) / static_cast<double>(n - 1));
    AndersonDarling out;
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
        out.statistic = std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<double> z(samples.begin(), samples.end());
    std::sort(z.begin(), z.end());
    for (double& v : z) v = (v - mean) / sd;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double weight = 2.0 * static_cast<double>(i + 1) - 1.0;
        s += weight * (log_normal_cdf(z[i]) + log_normal_cdf(-z[n - 1 - i]));
    }
    const auto nd = static_cast<double>(n);
    const double a2 = -nd - s / nd;
    out.statistic = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
    out.is_normal = out.statistic < 0.752;
    return out;
}

double t_test_unpaired(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("t-test needs at least 2 samples per group");
    const double ma = mean_of(a), mb = mean_of(b);
    const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double df = na + nb - 2.0;
    const double pooled = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / df;
    const double scale = std::max({1.0, std::fabs(ma), std::fabs(mb)});
    if (!(std::sqrt(pooled) > 1e-12 * scale)) return ma == mb ? 1.0 : 0.0;
    const double t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    const boost::math::students_t dist(df);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0, 1.0);
}

double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("rank-sum test needs at least 2 samples per group");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<long> ties;
    const auto ranks = doubled_midranks(pooled, ties);
    const std::size_t n = pooled.size(), na = a.size(), nb = b.size();
    if (ties.size() == 1) return 1.0;

    long w2 = 0;  // doubled rank sum of group a
    for (std::size_t i = 0; i < na; ++i) w2 += ranks[i];

    if (n <= 20) {
        const long max_sum = std::accumulate(ranks.begin(), ranks.end(), 0L);
        // ways[k][s]: subsets of size k with doubled rank sum s
        std::vector<std::vector<double>> ways(na + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t item = 0; item < n; ++item) {
            const auto r = static_cast<std::size_t>(ranks[item]);
            for (std::size_t k = std::min(item + 1, na); k >= 1; --k)
                for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s) ways[k][s] += ways[k - 1][s - r];
        }
        double total = 0.0, lower = 0.0, upper = 0.0;
        for (std::size_t s = 0; s < ways[na].size(); ++s) {
            const double c = ways[na][s];
            total += c;
            if (static_cast<long>(s) <= w2) lower += c;
            if (static_cast<long>(s) >= w2) upper += c;
        }
        return std::min(1.0, 2.0 * std::min(lower, upper) / total);
    }

    const double w = static_cast<double>(w2) / 2.0;
    const auto nd = static_cast<double>(n);
    const double mu = static_cast<double>(na) * (nd + 1.0) / 2.0;
    double tie_term = 0.0;
    for (long t : ties) tie_term += static_cast<double>(t * t * t - t);
    const double var =
        static_cast<double>(na) * static_cast<double>(nb) / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (!(var > 0.0)) return 1.0;
    const double z = std::max(0.0, std::fabs(w - mu) - 0.5) / std::sqrt(var);
    return std::clamp(std::erfc(z / std::numbers::sqrt2), 0.0, 1.0);
}

std::vector<std::size_t> ScreenResult::selected_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].selected) out.push_back(i);
    return out;
}

ScreenResult screen(const Matrix& features, std::span<const double> labels, std::size_t fallback_count) {
    if (labels.size() != features.rows()) throw std::invalid_argument("label count does not match feature rows");
    std::vector<std::size_t> off_rows, on_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0.0 ? off_rows : on_rows).push_back(i);
    if (off_rows.empty() || on_rows.empty())
        throw std::invalid_argument(std::string("screening needs both classes; no ") + (off_rows.empty() ? "OFF" : "ON") +
                                    " windows present");
    if (off_rows.size() < 8 || on_rows.size() < 8)
        throw std::invalid_argument("screening needs at least 8 windows per class");

    ScreenResult result;
    result.features.resize(features.cols());
    std::vector<double> off(off_rows.size()), on(on_rows.size());
    for (std::size_t c = 0; c < features.cols(); ++c) {
        for (std::size_t i = 0; i < off_rows.size(); ++i) off[i] = features(off_rows[i], c);
        for (std::size_t i = 0; i < on_rows.size(); ++i) on[i] = features(on_rows[i], c);
        FeatureScreen& fs = result.features[c];
        fs.normal_off = anderson_darling(off).is_normal;
        fs.normal_on = anderson_darling(on).is_normal;
        if (fs.normal_off && fs.normal_on) {
            fs.test = TestUsed::TTest;
            fs.p_value = t_test_unpaired(off, on);
        } else {
            fs.test = TestUsed::RankSum;
            fs.p_value = wilcoxon_rank_sum(off, on);
        }
        fs.selected = fs.p_value < kSignificance;
    }

    if (result.selected_indices().empty() && !result.features.empty()) {
        result.used_fallback = true;
        std::vector<std::size_t> order(result.features.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return result.features[i].p_value < result.features[j].p_value;
        });
        for (std::size_t k = 0; k < std::min(fallback_count, order.size()); ++k)
            result.features[order[k]].selected = true;
    }
    return result;
}

std::string screen_to_json(const ScreenResult& result, const std::vector<std::string>& feature_keys) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < result.features.size(); ++i) {
        const auto& f = result.features[i];
        arr.push_back({{"index", i},
                       {"key", i < feature_keys.size() ? feature_keys[i] : std::string()},
                       {"p_value", f.p_value},
                       {"test", f.test == TestUsed::TTest ? "t-test" : "rank-sum"},
                       {"selected", f.selected},
                       {"normal_on", f.normal_on},
                       {"normal_off", f.normal_off}});
    }
    nlohmann::json doc = {{"used_fallback", result.used_fallback}, {"features", arr}};
    return doc.dump(2);
}

}  // namespace pdstate::featselect
