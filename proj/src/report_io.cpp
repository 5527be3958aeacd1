#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pdstate/io.hpp"

namespace pdstate::io {

using nlohmann::json;

namespace {

std::optional<ReportState> parse_report_state(std::string_view text) {
    if (text == "ON") return ReportState::On;
    if (text == "OFF") return ReportState::Off;
    if (text == "INCONCLUSIVE") return ReportState::Inconclusive;
    return std::nullopt;
}

std::string positive_name(inference::PositiveClass p) {
    return p == inference::PositiveClass::On ? "ON" : "OFF";
}

}  // namespace

std::string report_to_json(const inference::StateReport& report) {
    const auto summary = report.summary();
    json j;
    j["format_version"] = 1;
    j["step_s"] = report.step_s;
    j["certainty_threshold"] = report.certainty_threshold;
    j["summary"] = {{"minutes_on", summary.minutes_on},
                    {"minutes_off", summary.minutes_off},
                    {"minutes_inconclusive", summary.minutes_inconclusive},
                    {"minutes_total", report.duration_minutes()}};
    json records = json::array();
    for (const auto& r : report.records)
        records.push_back({{"t", r.t},
                           {"raw_decision", r.raw_decision},
                           {"decision", r.decision},
                           {"certainty", r.certainty},
                           {"state", std::string(to_string(r.state))}});
    j["records"] = records;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const inference::StateReport& report) {
    std::string out = "t,decision,certainty,state\n";
    for (const auto& r : report.records) {
        out += format_double(r.t);
        out += ',';
        out += format_double(r.decision);
        out += ',';
        out += format_double(r.certainty);
        out += ',';
        out += to_string(r.state);
        out += '\n';
    }
    return out;
}

inference::StateReport report_from_json(const std::string& text) {
    inference::StateReport report;
    try {
        const json j = json::parse(text);
        report.step_s = j.at("step_s").get<double>();
        report.certainty_threshold = j.at("certainty_threshold").get<double>();
        for (const auto& r : j.at("records")) {
            inference::SecondRecord rec;
            rec.t = r.at("t").get<double>();
            rec.raw_decision = r.value("raw_decision", 0.0);
            rec.decision = r.at("decision").get<double>();
            rec.certainty = r.at("certainty").get<double>();
            const auto state = parse_report_state(r.at("state").get<std::string>());
            if (!state) throw ParseError("unknown report state '" + r.at("state").get<std::string>() + "'");
            rec.state = *state;
            report.records.push_back(rec);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
    try {
        report.validate();
    } catch (const InvariantError& e) {
        throw ParseError(std::string("invalid report: ") + e.what());
    }
    return report;
}

void write_report(const inference::StateReport& report, const std::filesystem::path& path, ReportFormat format) {
    write_text(path, format == ReportFormat::Json ? report_to_json(report) : report_to_csv(report));
}

inference::StateReport read_report(const std::filesystem::path& path) {
    try {
        return report_from_json(read_text(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string evaluation_to_json(const inference::EvaluationResult& r) {
    json j;
    j["positive_class"] = positive_name(r.positive);
    j["accuracy"] = r.accuracy;
    j["sensitivity"] = r.sensitivity;
    j["specificity"] = r.specificity;
    j["inconclusive_rate"] = r.inconclusive_rate;
    j["confusion"] = {{"tp", r.counts.tp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}, {"fp", r.counts.fp}};
    j["inconclusive_seconds"] = r.inconclusive;
    j["total_seconds"] = r.total;
    return j.dump(2) + "\n";
}

std::string activity_table_csv(const std::vector<inference::ActivityAccuracy>& rows) {
    std::string out = "activity,conclusive_seconds,correct_seconds,inconclusive_seconds,accuracy\n";
    for (const auto& r : rows) {
        out += to_string(r.activity);
        out += ',' + std::to_string(r.conclusive) + ',' + std::to_string(r.correct) + ',' +
               std::to_string(r.inconclusive) + ',';
        if (r.accuracy) out += format_double(*r.accuracy);
        out += '\n';
    }
    return out;
}

}  // namespace pdstate::io
