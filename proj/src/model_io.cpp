#include <cmath>
#include <string>

#include <json.hpp>

#include "pdstate/features.hpp"
#include "pdstate/io.hpp"
#include "pdstate/model.hpp"

namespace pdstate {

void SvmModel::validate() const {
    if (!(sample_rate_hz > 0.0)) throw InvariantError("model sample rate must be positive");
    if (sensors.empty()) throw InvariantError("model has no sensors");
    for (std::size_t i = 1; i < sensors.size(); ++i)
        if (!(sensors[i - 1] < sensors[i])) throw InvariantError("model sensors must be unique and wrist first");
    if (feature_indices.empty()) throw InvariantError("model feature mask is empty");
    const std::size_t width = features::kPerSensor * sensors.size();
    for (std::size_t i = 0; i < feature_indices.size(); ++i) {
        if (feature_indices[i] >= width)
            throw InvariantError("model feature index " + std::to_string(feature_indices[i]) + " out of range");
        if (i > 0 && feature_indices[i] <= feature_indices[i - 1])
            throw InvariantError("model feature indices must be strictly increasing");
    }
    if (!feature_keys.empty() && feature_keys.size() != feature_indices.size())
        throw InvariantError("model feature keys do not match the feature mask");
    const std::size_t d = feature_indices.size();
    if (normalization.mean.size() != d || normalization.scale.size() != d)
        throw InvariantError("model normalization size does not match the feature mask");
    for (std::size_t j = 0; j < d; ++j) {
        if (!std::isfinite(normalization.mean[j])) throw InvariantError("model normalization mean is not finite");
        if (!(normalization.scale[j] > 0.0) || !std::isfinite(normalization.scale[j]))
            throw InvariantError("model normalization scale must be positive");
    }
    svm.kernel.validate();
    if (!(svm.c > 0.0)) throw InvariantError("model SVM cost must be positive");
    if (svm.support_vectors.rows() == 0) throw InvariantError("model has no support vectors");
    if (svm.support_vectors.cols() != d) throw InvariantError("model support vector width does not match the mask");
    if (svm.dual_coef.size() != svm.support_vectors.rows())
        throw InvariantError("model dual coefficient count does not match the support vectors");
    if (!std::isfinite(svm.bias)) throw InvariantError("model bias is not finite");
    if (!std::isfinite(platt.a) || !std::isfinite(platt.b)) throw InvariantError("model calibration is not finite");
    if (!(certainty_threshold >= 0.5 && certainty_threshold <= 1.0))
        throw InvariantError("model certainty threshold outside [0.5, 1]");
}

std::vector<double> SvmModel::decision_values(const Matrix& full_features) const {
    const std::size_t width = features::kPerSensor * sensors.size();
    if (full_features.cols() != width)
        throw std::invalid_argument("feature matrix has " + std::to_string(full_features.cols()) +
                                    " columns, model expects " + std::to_string(width));
    const Matrix masked = full_features.select_cols(feature_indices);
    return svm.decision_values(normalization.apply(masked));
}

namespace io {

using nlohmann::json;

std::string model_to_json(const SvmModel& model) {
    model.validate();
    json j;
    j["format_version"] = kModelFormatVersion;
    j["sample_rate_hz"] = model.sample_rate_hz;
    json sensors = json::array();
    for (SensorId s : model.sensors) sensors.push_back(std::string(to_string(s)));
    j["sensors"] = sensors;
    j["feature_indices"] = model.feature_indices;
    j["feature_keys"] = model.feature_keys;
    j["normalization"] = {{"mean", model.normalization.mean}, {"scale", model.normalization.scale}};
    json kernel = {{"type", svm::to_string(model.svm.kernel.kind)}};
    if (model.svm.kernel.kind == svm::KernelKind::Rbf) kernel["gamma"] = model.svm.kernel.gamma;
    j["kernel"] = kernel;
    j["c"] = model.svm.c;
    json sv = json::array();
    for (std::size_t i = 0; i < model.svm.support_vectors.rows(); ++i) {
        const auto row = model.svm.support_vectors.row(i);
        sv.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["support_vectors"] = sv;
    j["dual_coef"] = model.svm.dual_coef;
    j["bias"] = model.svm.bias;
    j["platt"] = {{"a", model.platt.a}, {"b", model.platt.b}};
    j["certainty_threshold"] = model.certainty_threshold;
    return j.dump(2) + "\n";
}

SvmModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model is not valid JSON: ") + e.what());
    }
    SvmModel m;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw ParseError("unsupported model format_version " + std::to_string(version));
        m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        for (const auto& s : j.at("sensors")) {
            const auto id = parse_sensor(s.get<std::string>());
            if (!id) throw ParseError("unknown sensor '" + s.get<std::string>() + "' in model");
            m.sensors.push_back(*id);
        }
        m.feature_indices = j.at("feature_indices").get<std::vector<std::size_t>>();
        if (j.contains("feature_keys")) m.feature_keys = j.at("feature_keys").get<std::vector<std::string>>();
        m.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
        m.normalization.scale = j.at("normalization").at("scale").get<std::vector<double>>();
        const auto& kernel = j.at("kernel");
        m.svm.kernel.kind = svm::parse_kernel(kernel.at("type").get<std::string>());
        if (m.svm.kernel.kind == svm::KernelKind::Rbf) m.svm.kernel.gamma = kernel.at("gamma").get<double>();
        m.svm.c = j.at("c").get<double>();
        std::vector<std::vector<double>> rows;
        for (const auto& r : j.at("support_vectors")) rows.push_back(r.get<std::vector<double>>());
        m.svm.support_vectors = Matrix::from_rows(rows);
        m.svm.dual_coef = j.at("dual_coef").get<std::vector<double>>();
        m.svm.bias = j.at("bias").get<double>();
        m.platt.a = j.at("platt").at("a").get<double>();
        m.platt.b = j.at("platt").at("b").get<double>();
        m.certainty_threshold = j.at("certainty_threshold").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("malformed model: ") + e.what());
    }
    try {
        m.validate();
    } catch (const InvariantError& e) {
        throw ParseError(std::string("invalid model: ") + e.what());
    }
    return m;
}

void write_model(const SvmModel& model, const std::filesystem::path& path) {
    write_text(path, model_to_json(model));
}

SvmModel read_model(const std::filesystem::path& path) {
    try {
        return model_from_json(read_text(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace io
}  // namespace pdstate
