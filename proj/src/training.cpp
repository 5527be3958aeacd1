#include "pdstate/training.hpp"

#include <stdexcept>

#include <json.hpp>

#include "pdstate/features.hpp"
#include "pdstate/inference.hpp"

namespace pdstate::training {

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

TrainOutput train_subject(const Recording& recording, const TrainOptions& options) {
    const std::vector<SensorId> sensors = options.sensors.empty() ? recording.sensor_ids() : options.sensors;
    for (SensorId s : sensors)
        if (!recording.has_sensor(s))
            throw std::invalid_argument("sensor mismatch: training recording has no '" + std::string(to_string(s)) +
                                        "' stream");
    if (!recording.truth()) throw std::invalid_argument("training recording has no state labels");
    if (!recording.activity()) throw std::invalid_argument("training recording has no activity labels");

    const Recording subset = recording.with_sensors(sensors);
    const auto plan = stage("segment", [&] { return preprocess::plan_windows(subset, options.segment); });
    const Recording filtered = stage("preprocess", [&] {
        return preprocess::filter_recording(preprocess::default_bandpass(subset.sample_rate_hz()), subset);
    });
    const auto fm = stage("features", [&] { return features::extract_recording(filtered, plan, options.jobs); });

    TrainOutput out;
    const auto truth = inference::window_truth(plan);
    const auto activities = inference::window_activities(plan);
    std::vector<double> y(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        y[i] = label_value(truth[i]);
        (truth[i] == MedState::Off ? out.off_windows : out.on_windows)++;
    }
    out.windows = truth.size();
    if (out.off_windows == 0) throw std::invalid_argument("class degeneracy: training data has no OFF windows");
    if (out.on_windows == 0) throw std::invalid_argument("class degeneracy: training data has no ON windows");

    out.screen = stage("featselect", [&] { return featselect::screen(fm.values, y); });
    const auto screened = out.screen.selected_indices();
    const Matrix x_screened = fm.values.select_cols(screened);
    const auto scaler = svm::Standardizer::fit(x_screened);
    const Matrix x = scaler.apply(x_screened);

    out.search = stage("svm", [&] { return svm::select_model(x, y, 4, options.seed); });
    const auto& subset_cols = out.search.selected_features;
    const Matrix x_final = x.select_cols(subset_cols);

    out.cv = stage("calibrate", [&] {
        return calibrate::cv_decision_values(x_final, y, activities, out.search.best, options.seed);
    });
    out.platt = stage("calibrate", [&] { return calibrate::platt_fit(out.cv.values, y); });

    SvmModel& model = out.model;
    model.sample_rate_hz = subset.sample_rate_hz();
    model.sensors = sensors;
    const auto registry = features::registry_for(sensors);
    for (std::size_t j : subset_cols) {
        model.feature_indices.push_back(screened[j]);
        model.feature_keys.push_back(registry[screened[j]].key());
        model.normalization.mean.push_back(scaler.mean[j]);
        model.normalization.scale.push_back(scaler.scale[j]);
    }
    model.svm = stage("svm", [&] { return svm::train(x_final, y, out.search.best); });
    model.platt = out.platt.params;

    const auto d_train = model.svm.decision_values(x_final);
    std::vector<double> cert(d_train.size());
    for (std::size_t i = 0; i < d_train.size(); ++i) cert[i] = calibrate::certainty(d_train[i], model.platt);
    model.certainty_threshold = calibrate::select_threshold(cert);
    out.training_rejection = calibrate::rejection_rate(cert, model.certainty_threshold);
    stage("model", [&] {
        model.validate();
        return 0;
    });
    return out;
}

std::string summary_json(const TrainOutput& out) {
    using nlohmann::json;
    const auto& m = out.model;
    json j;
    j["sensors"] = json::array();
    for (SensorId s : m.sensors) j["sensors"].push_back(std::string(to_string(s)));
    j["windows"] = {{"total", out.windows}, {"off", out.off_windows}, {"on", out.on_windows}};
    j["screened_feature_count"] = out.screen.selected_indices().size();
    j["screen_used_fallback"] = out.screen.used_fallback;
    j["selected_features"] = m.feature_keys;
    j["kernel"] = svm::to_string(m.svm.kernel.kind);
    j["c"] = m.svm.c;
    if (m.svm.kernel.kind == svm::KernelKind::Rbf) j["gamma"] = m.svm.kernel.gamma;
    else j["gamma"] = nullptr;
    j["grid_cv_accuracy"] = out.search.best_accuracy;
    const auto& trace = out.search.rfe_trace;
    const std::size_t initial = out.screen.selected_indices().size();
    const std::size_t pos = initial - m.feature_indices.size();
    j["cv_accuracy"] = pos < trace.size() ? trace[pos] : out.search.best_accuracy;
    j["rfe_trace"] = out.search.rfe_trace;
    j["platt"] = {{"a", m.platt.a}, {"b", m.platt.b}, {"iterations", out.platt.iterations},
                  {"converged", out.platt.converged}};
    j["calibration_folds"] = out.cv.activity_folds ? "activity" : "stratified";
    j["warnings"] = out.cv.warnings;
    j["certainty_threshold"] = m.certainty_threshold;
    j["training_rejection_rate"] = out.training_rejection;
    return j.dump(2) + "\n";
}

}  // namespace pdstate::training
