#pragma once

// Test-time pipeline: smoothing of per-second decision values, sign rule,
// certainty censoring, report assembly and evaluation.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pdstate/calibrate.hpp"
#include "pdstate/model.hpp"
#include "pdstate/preprocess.hpp"
#include "pdstate/types.hpp"

namespace pdstate::inference {

/// Centered moving average; windows shrink to the available neighbours at the edges.
/// Even widths take width/2 samples before and width/2 - 1 after.
std::vector<double> moving_average(std::span<const double> d, std::size_t width);

/// Width-5 average followed by a width-40 average; output length equals input length.
std::vector<double> smooth(std::span<const double> d);

/// OFF iff m > 0.
std::vector<MedState> predict_states(std::span<const double> m);

struct CensoredSecond {
    ReportState state = ReportState::On;
    double certainty = 0.0;
};

std::vector<CensoredSecond> censor(std::span<const double> m, const calibrate::PlattParams& platt, double threshold);

struct SecondRecord {
    double t = 0.0;             // seconds, window end
    double raw_decision = 0.0;  // D_n
    double decision = 0.0;      // M_n
    double certainty = 0.0;
    ReportState state = ReportState::On;
};

struct ReportSummary {
    double minutes_on = 0.0;
    double minutes_off = 0.0;
    double minutes_inconclusive = 0.0;
};

struct StateReport {
    double step_s = 1.0;
    double certainty_threshold = 0.5;
    std::vector<SecondRecord> records;

    ReportSummary summary() const;
    double duration_minutes() const { return static_cast<double>(records.size()) * step_s / 60.0; }
    void validate() const;
};

enum class PositiveClass { On, Off };

struct Confusion {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
};

struct EvaluationResult {
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double inconclusive_rate = 0.0;
    Confusion counts;
    std::size_t inconclusive = 0;
    std::size_t total = 0;
    PositiveClass positive = PositiveClass::On;
};

/// Inconclusive seconds are excluded from the confusion counts. Throws if none are conclusive.
EvaluationResult evaluate(std::span<const ReportState> predicted, std::span<const MedState> truth,
                          PositiveClass positive = PositiveClass::On);
EvaluationResult evaluate(const StateReport& report, std::span<const MedState> truth,
                          PositiveClass positive = PositiveClass::On);

struct ActivityAccuracy {
    Activity activity = Activity::Resting;
    std::size_t conclusive = 0;
    std::size_t correct = 0;
    std::size_t inconclusive = 0;
    std::optional<double> accuracy;  // empty when the activity has no conclusive seconds
};

/// One row per activity, in the fixed activity order.
std::vector<ActivityAccuracy> per_activity_accuracy(const StateReport& report, std::span<const MedState> truth,
                                                    std::span<const Activity> activities);

struct PipelineOptions {
    preprocess::SegmentOptions segment;
    unsigned jobs = 0;
};

struct PipelineOutput {
    StateReport report;
    preprocess::WindowPlan plan;  // window labels give the per-second truth when present
};

/// Filter, segment, extract, classify, smooth and censor a recording with a trained model.
PipelineOutput run_pipeline(const Recording& recording, const SvmModel& model, const PipelineOptions& options = {});

/// Per-second truth and activity from window majority labels (throws if the recording is unlabeled).
std::vector<MedState> window_truth(const preprocess::WindowPlan& plan);
std::vector<Activity> window_activities(const preprocess::WindowPlan& plan);

}  // namespace pdstate::inference
