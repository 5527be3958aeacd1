#include "pdstate/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pdstate/features.hpp"

namespace pdstate::inference {

std::vector<double> moving_average(std::span<const double> d, std::size_t width) {
    if (width == 0) throw std::invalid_argument("moving average width must be positive");
    const std::size_t before = width / 2;
    const std::size_t after = width - 1 - before;
    const std::size_t n = d.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= before ? i - before : 0;
        const std::size_t hi = std::min(n, i + after + 1);
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += d[k];
        out[i] = s / static_cast<double>(hi - lo);
    }
    return out;
}

std::vector<double> smooth(std::span<const double> d) {
    const auto stage1 = moving_average(d, 5);
    auto stage2 = moving_average(stage1, 40);
    // Averages of values in [min, max] can round past the bounds by an ulp.
    if (!d.empty()) {
        const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
        for (double& v : stage2) v = std::clamp(v, *lo, *hi);
    }
    return stage2;
}

std::vector<MedState> predict_states(std::span<const double> m) {
    std::vector<MedState> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] > 0.0 ? MedState::Off : MedState::On;
    return out;
}

std::vector<CensoredSecond> censor(std::span<const double> m, const calibrate::PlattParams& platt, double threshold) {
    std::vector<CensoredSecond> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i].certainty = calibrate::certainty(m[i], platt);
        if (out[i].certainty < threshold) out[i].state = ReportState::Inconclusive;
        else out[i].state = m[i] > 0.0 ? ReportState::Off : ReportState::On;
    }
    return out;
}

ReportSummary StateReport::summary() const {
    ReportSummary s;
    std::size_t on = 0, off = 0, inc = 0;
    for (const auto& r : records) {
        switch (r.state) {
            case ReportState::On: ++on; break;
            case ReportState::Off: ++off; break;
            case ReportState::Inconclusive: ++inc; break;
        }
    }
    s.minutes_on = static_cast<double>(on) * step_s / 60.0;
    s.minutes_off = static_cast<double>(off) * step_s / 60.0;
    s.minutes_inconclusive = static_cast<double>(inc) * step_s / 60.0;
    return s;
}

void StateReport::validate() const {
    if (!(step_s > 0.0)) throw InvariantError("report step must be positive");
    if (!(certainty_threshold >= 0.5 && certainty_threshold <= 1.0))
        throw InvariantError("report certainty threshold outside [0.5, 1]");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!(r.certainty >= 0.0 && r.certainty <= 1.0) || !std::isfinite(r.decision))
            throw InvariantError("report record " + std::to_string(i) + " has invalid decision or certainty");
        if ((r.state == ReportState::Inconclusive) != (r.certainty < certainty_threshold))
            throw InvariantError("report record " + std::to_string(i) +
                                 " state disagrees with its certainty and the threshold");
    }
}

EvaluationResult evaluate(std::span<const ReportState> predicted, std::span<const MedState> truth,
                          PositiveClass positive) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("alignment error: " + std::to_string(predicted.size()) + " predicted seconds vs " +
                                    std::to_string(truth.size()) + " truth seconds");
    EvaluationResult r;
    r.positive = positive;
    r.total = predicted.size();
    const MedState pos = positive == PositiveClass::On ? MedState::On : MedState::Off;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == ReportState::Inconclusive) {
            ++r.inconclusive;
            continue;
        }
        const MedState p = predicted[i] == ReportState::On ? MedState::On : MedState::Off;
        if (truth[i] == pos) (p == pos ? r.counts.tp : r.counts.fn)++;
        else (p == pos ? r.counts.fp : r.counts.tn)++;
    }
    const std::size_t conclusive = r.total - r.inconclusive;
    if (conclusive == 0) throw std::invalid_argument("no conclusive seconds to evaluate");
    r.accuracy = static_cast<double>(r.counts.tp + r.counts.tn) / static_cast<double>(conclusive);
    const std::size_t p_total = r.counts.tp + r.counts.fn;
    const std::size_t n_total = r.counts.tn + r.counts.fp;
    r.sensitivity = p_total ? static_cast<double>(r.counts.tp) / static_cast<double>(p_total) : 0.0;
    r.specificity = n_total ? static_cast<double>(r.counts.tn) / static_cast<double>(n_total) : 0.0;
    r.inconclusive_rate = static_cast<double>(r.inconclusive) / static_cast<double>(r.total);
    return r;
}

EvaluationResult evaluate(const StateReport& report, std::span<const MedState> truth, PositiveClass positive) {
    std::vector<ReportState> states;
    states.reserve(report.records.size());
    for (const auto& r : report.records) states.push_back(r.state);
    return evaluate(states, truth, positive);
}

std::vector<ActivityAccuracy> per_activity_accuracy(const StateReport& report, std::span<const MedState> truth,
                                                    std::span<const Activity> activities) {
    if (truth.size() != report.records.size() || activities.size() != report.records.size())
        throw std::invalid_argument("alignment error: truth/activity length differs from the report");
    std::vector<ActivityAccuracy> rows;
    for (Activity a : kAllActivities) rows.push_back({a, 0, 0, 0, std::nullopt});
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& row = rows[static_cast<std::size_t>(activities[i])];
        const ReportState s = report.records[i].state;
        if (s == ReportState::Inconclusive) {
            ++row.inconclusive;
            continue;
        }
        ++row.conclusive;
        const MedState p = s == ReportState::On ? MedState::On : MedState::Off;
        row.correct += p == truth[i];
    }
    for (auto& row : rows)
        if (row.conclusive) row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.conclusive);
    return rows;
}

std::vector<MedState> window_truth(const preprocess::WindowPlan& plan) {
    std::vector<MedState> out;
    out.reserve(plan.windows.size());
    for (const auto& w : plan.windows) {
        if (!w.label) throw std::invalid_argument("recording has no truth labels");
        out.push_back(*w.label);
    }
    return out;
}

std::vector<Activity> window_activities(const preprocess::WindowPlan& plan) {
    std::vector<Activity> out;
    out.reserve(plan.windows.size());
    for (const auto& w : plan.windows) {
        if (!w.activity) throw std::invalid_argument("recording has no activity labels");
        out.push_back(*w.activity);
    }
    return out;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

PipelineOutput run_pipeline(const Recording& recording, const SvmModel& model, const PipelineOptions& options) {
    model.validate();
    for (SensorId s : model.sensors)
        if (!recording.has_sensor(s))
            throw std::invalid_argument("sensor mismatch: model needs a '" + std::string(to_string(s)) +
                                        "' stream that the recording does not have");
    if (std::fabs(recording.sample_rate_hz() - model.sample_rate_hz) > 1e-9)
        throw std::invalid_argument("sample rate mismatch between recording and model");

    const Recording subset = recording.with_sensors(model.sensors);
    PipelineOutput out;
    out.plan = stage("segment", [&] { return preprocess::plan_windows(subset, options.segment); });
    const Recording filtered = stage("preprocess", [&] {
        return preprocess::filter_recording(preprocess::default_bandpass(subset.sample_rate_hz()), subset);
    });
    const auto fm = stage("features", [&] { return features::extract_recording(filtered, out.plan, options.jobs); });
    const auto raw = stage("classify", [&] { return model.decision_values(fm.values); });
    const auto m = smooth(raw);
    const auto censored = censor(m, model.platt, model.certainty_threshold);

    const double fs = subset.sample_rate_hz();
    out.report.step_s = static_cast<double>(out.plan.hop_samples) / fs;
    out.report.certainty_threshold = model.certainty_threshold;
    out.report.records.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto& r = out.report.records[i];
        r.t = subset.start_time_s() +
              static_cast<double>(out.plan.windows[i].start_sample + out.plan.window_samples) / fs;
        r.raw_decision = raw[i];
        r.decision = m[i];
        r.certainty = censored[i].certainty;
        r.state = censored[i].state;
    }
    return out;
}

}  // namespace pdstate::inference
