// Command-line front end: synth, train, predict, evaluate, features dump.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdstate/calibrate.hpp"
#include "pdstate/features.hpp"
#include "pdstate/inference.hpp"
#include "pdstate/io.hpp"
#include "pdstate/synthgen.hpp"
#include "pdstate/training.hpp"

namespace fs = std::filesystem;
using namespace pdstate;

namespace {

/** JSON config files: top-level keys are option names, nested objects address subcommands. */
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        throw CLI::ConfigError("writing JSON configs is not supported");
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        if (!obj.is_object()) throw CLI::ConversionError("config root must be a JSON object");
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                collect(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            else
                item.inputs.push_back(scalar(value));
            items.push_back(std::move(item));
        }
    }
};

struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::vector<SensorId> sensors_from_flag(const std::string& flag) {
    if (flag == "wrist") return {SensorId::Wrist};
    if (flag == "ankle") return {SensorId::Ankle};
    if (flag == "both") return {SensorId::Wrist, SensorId::Ankle};
    throw std::invalid_argument("--sensors must be wrist, ankle or both");
}

void require_file(const std::string& path, const char* what) {
    if (!fs::is_regular_file(path)) throw StageError("config", std::string(what) + " '" + path + "' does not exist");
}

void require_parent(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
        throw StageError("config", "output directory '" + parent.string() + "' does not exist");
}

Recording load_recording(const std::string& path, double fs_hz) {
    return stage("read_recording", [&] { return io::read_recording(fs::path(path), io::RecordingFormat{fs_hz}); });
}

struct SynthArgs {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string synth_config;
    std::string output;
};

void run_synth(const SynthArgs& a) {
    if (!a.synth_config.empty()) {
        require_file(a.synth_config, "synth config");
        if (a.output.empty()) throw StageError("config", "--output is required with --synth-config");
        require_parent(a.output);
        const auto cfg = stage("synth", [&] { return synthgen::synth_config_from_json(io::read_text(a.synth_config)); });
        const auto rec = stage("synth", [&] {
            return synthgen::generate(cfg.profile, cfg.schedule, cfg.sample_rate_hz, cfg.start_time_s);
        });
        stage("write_recording", [&] {
            io::write_recording(rec, fs::path(a.output));
            return 0;
        });
        return;
    }
    stage("config", [&] { fs::create_directories(a.out_dir); });
    const auto study = stage("synth", [&] { return synthgen::default_study(a.seed); });
    stage("write_recording", [&] {
        io::write_recording(study.training, fs::path(a.out_dir) / "training.csv");
        io::write_recording(study.testing, fs::path(a.out_dir) / "testing.csv");
        return 0;
    });
    nlohmann::json p;
    p["seed"] = a.seed;
    p["tremor_site"] = std::string(synthgen::to_string(study.profile.tremor_site));
    p["tremor_frequency_hz"] = study.profile.tremor_frequency_hz;
    p["off_tremor_amplitude"] = study.profile.off_tremor_amplitude;
    p["on_attenuation"] = study.profile.on_attenuation;
    p["bradykinesia_factor"] = study.profile.bradykinesia_factor;
    p["noise_floor"] = study.profile.noise_floor;
    io::write_text(fs::path(a.out_dir) / "profile.json", p.dump(2) + "\n");
}

struct TrainArgs {
    std::string input;
    std::string model = "model.json";
    std::string summary;
    std::string curves_dir;
    std::string sensors = "both";
    std::uint64_t seed = 0;
    double sample_rate = 128.0;
    unsigned jobs = 0;
};

void run_train(const TrainArgs& a) {
    require_file(a.input, "training recording");
    require_parent(a.model);
    if (!a.summary.empty()) require_parent(a.summary);
    if (!a.curves_dir.empty()) stage("config", [&] { fs::create_directories(a.curves_dir); });
    const auto sensors = stage("config", [&] { return sensors_from_flag(a.sensors); });
    const Recording rec = load_recording(a.input, a.sample_rate);

    training::TrainOptions opt;
    opt.sensors = sensors;
    opt.seed = a.seed;
    opt.jobs = a.jobs;
    const auto out = stage("train", [&] { return training::train_subject(rec, opt); });
    for (const auto& w : out.cv.warnings) std::fprintf(stderr, "warning: calibrate: %s\n", w.c_str());
    stage("write_model", [&] {
        io::write_model(out.model, fs::path(a.model));
        return 0;
    });
    const std::string summary = training::summary_json(out);
    if (a.summary.empty()) std::cout << summary;
    else io::write_text(a.summary, summary);

    if (!a.curves_dir.empty()) {
        std::vector<double> y;
        for (const auto& w : preprocess::plan_windows(rec).windows) y.push_back(label_value(*w.label));
        const auto [lo, hi] = std::minmax_element(out.cv.values.begin(), out.cv.values.end());
        io::write_text(fs::path(a.curves_dir) / "sigmoid_curve.csv",
                       calibrate::sigmoid_curve_csv(out.model.platt, *lo, *hi));
        io::write_text(fs::path(a.curves_dir) / "rejection_table.csv",
                       calibrate::rejection_table_csv(out.cv.values, y, out.model.platt));
    }
}

inference::PositiveClass positive_from_flag(const std::string& flag) {
    if (flag == "on" || flag == "ON") return inference::PositiveClass::On;
    if (flag == "off" || flag == "OFF") return inference::PositiveClass::Off;
    throw std::invalid_argument("--positive must be on or off");
}

io::ReportFormat format_for(const std::string& flag, const std::string& path) {
    if (flag == "json") return io::ReportFormat::Json;
    if (flag == "csv") return io::ReportFormat::Csv;
    if (flag != "auto") throw StageError("config", "--format must be json, csv or auto");
    return fs::path(path).extension() == ".csv" ? io::ReportFormat::Csv : io::ReportFormat::Json;
}

struct PredictArgs {
    std::string model;
    std::string input;
    std::string report = "report.json";
    std::string format = "auto";
    std::string metrics;
    std::string activity_table;
    std::string sensors;
    std::string positive = "on";
    unsigned jobs = 0;
};

void run_predict(const PredictArgs& a) {
    require_file(a.model, "model");
    require_file(a.input, "recording");
    require_parent(a.report);
    const auto positive = stage("config", [&] { return positive_from_flag(a.positive); });
    const auto format = format_for(a.format, a.report);
    const SvmModel model = stage("read_model", [&] { return io::read_model(a.model); });
    Recording rec = load_recording(a.input, model.sample_rate_hz);
    if (!a.sensors.empty()) {
        const auto keep = stage("config", [&] { return sensors_from_flag(a.sensors); });
        for (SensorId s : keep)
            if (!rec.has_sensor(s))
                throw StageError("config", "recording has no '" + std::string(to_string(s)) + "' stream");
        rec = rec.with_sensors(keep);
    }
    inference::PipelineOptions opt;
    opt.jobs = a.jobs;
    const auto out = stage("predict", [&] { return inference::run_pipeline(rec, model, opt); });
    stage("write_report", [&] {
        io::write_report(out.report, fs::path(a.report), format);
        return 0;
    });
    if (!rec.truth()) return;

    const auto truth = inference::window_truth(out.plan);
    const auto ev = stage("evaluate", [&] { return inference::evaluate(out.report, truth, positive); });
    const std::string metrics =
        a.metrics.empty() ? (fs::path(a.report).replace_extension("").string() + ".metrics.json") : a.metrics;
    io::write_text(metrics, io::evaluation_to_json(ev));
    if (!a.activity_table.empty() && rec.activity()) {
        const auto rows = inference::per_activity_accuracy(out.report, truth, inference::window_activities(out.plan));
        io::write_text(a.activity_table, io::activity_table_csv(rows));
    }
}

struct EvaluateArgs {
    std::string report;
    std::string truth;
    std::string output;
    std::string activity_table;
    std::string positive = "on";
    double sample_rate = 128.0;
};

void run_evaluate(const EvaluateArgs& a) {
    require_file(a.report, "report");
    require_file(a.truth, "truth recording");
    const auto positive = stage("config", [&] { return positive_from_flag(a.positive); });
    const auto report = stage("read_report", [&] { return io::read_report(a.report); });
    const Recording rec = load_recording(a.truth, a.sample_rate);
    const auto plan = stage("segment", [&] { return preprocess::plan_windows(rec); });
    if (plan.windows.size() != report.records.size())
        throw StageError("evaluate", "alignment error: report has " + std::to_string(report.records.size()) +
                                         " seconds, truth recording yields " + std::to_string(plan.windows.size()));
    const auto truth = stage("evaluate", [&] { return inference::window_truth(plan); });
    const auto ev = stage("evaluate", [&] { return inference::evaluate(report, truth, positive); });
    const std::string metrics = io::evaluation_to_json(ev);
    if (a.output.empty()) std::cout << metrics;
    else io::write_text(a.output, metrics);
    if (rec.activity()) {
        const auto rows = stage("evaluate", [&] {
            return inference::per_activity_accuracy(report, truth, inference::window_activities(plan));
        });
        const std::string table = io::activity_table_csv(rows);
        if (a.activity_table.empty()) std::cout << table;
        else io::write_text(a.activity_table, table);
    }
}

struct DumpArgs {
    std::string input;
    std::string output;
    std::string registry;
    std::string sensors = "both";
    double sample_rate = 128.0;
    unsigned jobs = 0;
};

std::string registry_json(const std::vector<SensorId>& sensors) {
    nlohmann::json j;
    j["registry_version"] = features::kRegistryVersion;
    j["features"] = nlohmann::json::array();
    const auto registry = features::registry_for(sensors);
    for (std::size_t c = 0; c < registry.size(); ++c) {
        const auto& d = registry[c];
        j["features"].push_back(
            {{"column", c}, {"id", d.id}, {"name", d.name}, {"axis", d.axis}, {"sensor", d.sensor}, {"key", d.key()}});
    }
    return j.dump(2) + "\n";
}

void run_features_dump(const DumpArgs& a) {
    const auto sensors = stage("config", [&] { return sensors_from_flag(a.sensors); });
    if (!a.registry.empty()) {
        require_parent(a.registry);
        io::write_text(a.registry, registry_json(sensors));
        if (a.input.empty()) return;
    }
    if (a.input.empty()) throw StageError("config", "features dump needs --input or --registry");
    require_file(a.input, "recording");
    if (!a.output.empty()) require_parent(a.output);
    const Recording rec = load_recording(a.input, a.sample_rate);
    for (SensorId s : sensors)
        if (!rec.has_sensor(s))
            throw StageError("config", "recording has no '" + std::string(to_string(s)) + "' stream");
    const Recording subset = rec.with_sensors(sensors);
    const auto plan = stage("segment", [&] { return preprocess::plan_windows(subset); });
    const Recording filtered = stage("preprocess", [&] {
        return preprocess::filter_recording(preprocess::default_bandpass(subset.sample_rate_hz()), subset);
    });
    const auto fm = stage("features", [&] { return features::extract_recording(filtered, plan, a.jobs); });
    const auto registry = features::registry_for(sensors);

    std::ostringstream os;
    os << "window_start_s,state,activity";
    for (const auto& d : registry) os << ',' << d.key();
    os << '\n';
    for (std::size_t i = 0; i < fm.values.rows(); ++i) {
        const auto& w = plan.windows[i];
        os << io::format_double(subset.start_time_s() + static_cast<double>(w.start_sample) / subset.sample_rate_hz())
           << ',' << (w.label ? to_string(*w.label) : "") << ',' << (w.activity ? to_string(*w.activity) : "");
        for (double v : fm.values.row(i)) os << ',' << io::format_double(v);
        os << '\n';
    }
    if (fm.flagged_entries)
        std::fprintf(stderr, "warning: features: %zu non-finite values replaced by 0\n", fm.flagged_entries);
    if (a.output.empty()) std::cout << os.str();
    else io::write_text(a.output, os.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-second medication state detection from wrist and ankle gyroscopes"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with option values; nested objects address subcommands");

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic training/testing study");
    cmd_synth->add_option("--seed", synth.seed, "Study seed")->capture_default_str();
    cmd_synth->add_option("--out-dir", synth.out_dir, "Directory for training.csv, testing.csv, profile.json")
        ->capture_default_str();
    cmd_synth->add_option("--synth-config", synth.synth_config, "JSON profile and schedule for a single recording");
    cmd_synth->add_option("--output", synth.output, "Recording CSV written with --synth-config");

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "Fit a subject model from a labeled recording");
    cmd_train->add_option("--input,-i", train.input, "Labeled training recording CSV")->required();
    cmd_train->add_option("--model,-m", train.model, "Model JSON to write")->capture_default_str();
    cmd_train->add_option("--summary", train.summary, "Training summary JSON (default: stdout)");
    cmd_train->add_option("--curves-dir", train.curves_dir, "Directory for sigmoid and rejection CSVs");
    cmd_train->add_option("--sensors", train.sensors, "wrist, ankle or both")->capture_default_str();
    cmd_train->add_option("--seed", train.seed, "Cross-validation seed")->capture_default_str();
    cmd_train->add_option("--sample-rate", train.sample_rate, "Sampling rate in Hz")->capture_default_str();
    cmd_train->add_option("--jobs,-j", train.jobs, "Feature extraction threads (0 = all cores)");

    PredictArgs predict;
    auto* cmd_predict = app.add_subcommand("predict", "Produce a per-second state report");
    cmd_predict->add_option("--model,-m", predict.model, "Model JSON")->required();
    cmd_predict->add_option("--input,-i", predict.input, "Recording CSV")->required();
    cmd_predict->add_option("--report,-o", predict.report, "Report path")->capture_default_str();
    cmd_predict->add_option("--format", predict.format, "json, csv or auto (by extension)")->capture_default_str();
    cmd_predict->add_option("--metrics", predict.metrics, "Metrics JSON when the recording is labeled");
    cmd_predict->add_option("--activity-table", predict.activity_table, "Per-activity accuracy CSV");
    cmd_predict->add_option("--sensors", predict.sensors, "Restrict the recording to wrist, ankle or both");
    cmd_predict->add_option("--positive", predict.positive, "Positive class for metrics: on or off")
        ->capture_default_str();
    cmd_predict->add_option("--jobs,-j", predict.jobs, "Feature extraction threads (0 = all cores)");

    EvaluateArgs evaluate;
    auto* cmd_eval = app.add_subcommand("evaluate", "Score a JSON report against a labeled recording");
    cmd_eval->add_option("--report,-r", evaluate.report, "Report JSON")->required();
    cmd_eval->add_option("--truth,-t", evaluate.truth, "Labeled recording CSV")->required();
    cmd_eval->add_option("--output,-o", evaluate.output, "Metrics JSON (default: stdout)");
    cmd_eval->add_option("--activity-table", evaluate.activity_table, "Per-activity accuracy CSV (default: stdout)");
    cmd_eval->add_option("--positive", evaluate.positive, "Positive class: on or off")->capture_default_str();
    cmd_eval->add_option("--sample-rate", evaluate.sample_rate, "Sampling rate in Hz")->capture_default_str();

    DumpArgs dump;
    auto* cmd_features = app.add_subcommand("features", "Feature utilities");
    cmd_features->require_subcommand(1);
    auto* cmd_dump = cmd_features->add_subcommand("dump", "Write the per-window feature matrix as CSV");
    cmd_dump->add_option("--input,-i", dump.input, "Recording CSV");
    cmd_dump->add_option("--registry", dump.registry, "Write the feature registry (column, id, name, axis, sensor) as JSON");
    cmd_dump->add_option("--output,-o", dump.output, "Feature CSV (default: stdout)");
    cmd_dump->add_option("--sensors", dump.sensors, "wrist, ankle or both")->capture_default_str();
    cmd_dump->add_option("--sample-rate", dump.sample_rate, "Sampling rate in Hz")->capture_default_str();
    cmd_dump->add_option("--jobs,-j", dump.jobs, "Feature extraction threads (0 = all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_synth) run_synth(synth);
        else if (*cmd_train) run_train(train);
        else if (*cmd_predict) run_predict(predict);
        else if (*cmd_eval) run_evaluate(evaluate);
        else if (*cmd_dump) run_features_dump(dump);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
