#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pdstate/io.hpp"

namespace pdstate::io {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view text, std::size_t line, const char* column) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        fail(line, std::string("non-numeric value '") + std::string(text) + "' in column " + column);
    return v;
}

struct SensorRows {
    std::vector<double> t, x, y, z;
    std::vector<std::optional<MedState>> state;
    std::vector<std::optional<Activity>> activity;
    std::size_t first_line = 0;
};

template <typename T>
std::optional<std::vector<T>> collect_labels(const std::vector<std::optional<T>>& raw, const char* what) {
    std::size_t present = 0;
    for (const auto& v : raw) present += v.has_value();
    if (present == 0) return std::nullopt;
    if (present != raw.size())
        throw ParseError(std::string("incomplete ") + what + " labels: some rows are blank and some are not");
    std::vector<T> out;
    out.reserve(raw.size());
    for (const auto& v : raw) out.push_back(*v);
    return out;
}

}  // namespace

Recording read_recording(std::istream& in, const RecordingFormat& format) {
    if (!(format.sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty recording file");
    const auto header = split_csv(trim(line));
    static const std::vector<std::string_view> required = {"timestamp_s", "sensor", "gx", "gy", "gz"};
    if (header.size() < required.size() || !std::equal(required.begin(), required.end(), header.begin(),
                                                       [](auto a, auto b) { return a == trim(b); }))
        throw ParseError("line 1: header must start with timestamp_s,sensor,gx,gy,gz");
    int state_col = -1, activity_col = -1;
    for (std::size_t c = required.size(); c < header.size(); ++c) {
        const auto name = trim(header[c]);
        if (name == "state") state_col = static_cast<int>(c);
        else if (name == "activity") activity_col = static_cast<int>(c);
        else throw ParseError("line 1: unknown column '" + std::string(name) + "'");
    }

    const double dt = 1.0 / format.sample_rate_hz;
    std::map<SensorId, SensorRows> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto cells = split_csv(body);
        if (cells.size() != header.size())
            fail(lineno, "expected " + std::to_string(header.size()) + " columns, found " + std::to_string(cells.size()));
        const double t = parse_number(cells[0], lineno, "timestamp_s");
        const auto sensor = parse_sensor(trim(cells[1]));
        if (!sensor) fail(lineno, "unknown sensor id '" + std::string(trim(cells[1])) + "'");
        auto& r = rows[*sensor];
        if (r.t.empty()) r.first_line = lineno;
        if (!r.t.empty()) {
            const double gap = t - r.t.back();
            if (!(gap > 0.0)) fail(lineno, "non-monotonic timestamps for sensor '" + std::string(to_string(*sensor)) + "'");
            if (std::fabs(gap - dt) > format.timestamp_tolerance_s)
                fail(lineno, "timestamp spacing " + format_double(gap) + " s does not match the sample rate");
        }
        r.t.push_back(t);
        r.x.push_back(parse_number(cells[2], lineno, "gx"));
        r.y.push_back(parse_number(cells[3], lineno, "gy"));
        r.z.push_back(parse_number(cells[4], lineno, "gz"));

        std::optional<MedState> st;
        if (state_col >= 0) {
            const auto text = trim(cells[static_cast<std::size_t>(state_col)]);
            if (!text.empty()) {
                st = parse_state(text);
                if (!st) fail(lineno, "state must be ON, OFF or blank, got '" + std::string(text) + "'");
            }
        }
        r.state.push_back(st);
        std::optional<Activity> act;
        if (activity_col >= 0) {
            const auto text = trim(cells[static_cast<std::size_t>(activity_col)]);
            if (!text.empty()) {
                act = parse_activity(text);
                if (!act) fail(lineno, "unknown activity '" + std::string(text) + "'");
            }
        }
        r.activity.push_back(act);
    }
    if (rows.empty()) throw ParseError("recording has no data rows");

    const SensorRows& ref = rows.begin()->second;
    std::vector<SensorStream> streams;
    for (auto& [id, r] : rows) {
        if (r.t.size() != ref.t.size())
            throw ParseError("mismatched stream lengths: '" + std::string(to_string(id)) + "' has " +
                             std::to_string(r.t.size()) + " rows, expected " + std::to_string(ref.t.size()));
        if (std::fabs(r.t.front() - ref.t.front()) > format.timestamp_tolerance_s)
            throw ParseError("sensor streams start at different timestamps");
        if (r.state != ref.state || r.activity != ref.activity)
            throw ParseError("sensor '" + std::string(to_string(id)) + "' carries labels that disagree with '" +
                             std::string(to_string(rows.begin()->first)) + "'");
        streams.push_back({id, std::move(r.x), std::move(r.y), std::move(r.z)});
    }
    auto truth = collect_labels(ref.state, "state");
    auto activity = collect_labels(ref.activity, "activity");
    const double t0 = ref.t.front();
    return Recording(format.sample_rate_hz, std::move(streams), std::move(truth), std::move(activity), t0);
}

Recording read_recording(const std::filesystem::path& path, const RecordingFormat& format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open recording '" + path.string() + "'");
    try {
        return read_recording(in, format);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_recording(const Recording& recording, std::ostream& out) {
    const bool with_state = recording.truth().has_value();
    const bool with_activity = recording.activity().has_value();
    out << "timestamp_s,sensor,gx,gy,gz";
    if (with_state || with_activity) out << ",state";
    if (with_activity) out << ",activity";
    out << '\n';
    const double fs = recording.sample_rate_hz();
    char tbuf[64];
    for (std::size_t i = 0; i < recording.length_samples(); ++i) {
        const double t = recording.start_time_s() + static_cast<double>(i) / fs;
        std::snprintf(tbuf, sizeof tbuf, "%.9f", t);
        for (const auto& s : recording.streams()) {
            out << tbuf << ',' << to_string(s.id) << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i]) << ','
                << format_double(s.z[i]);
            if (with_state || with_activity) out << ',' << (with_state ? to_string((*recording.truth())[i]) : "");
            if (with_activity) out << ',' << to_string((*recording.activity())[i]);
            out << '\n';
        }
    }
}

void write_recording(const Recording& recording, const std::filesystem::path& path) {
    std::ostringstream os;
    write_recording(recording, os);
    write_text(path, os.str());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace pdstate::io
