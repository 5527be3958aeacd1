#include "pdstate/types.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace pdstate {

std::string_view to_string(SensorId id) { return id == SensorId::Wrist ? "wrist" : "ankle"; }

std::string_view to_string(MedState s) { return s == MedState::On ? "ON" : "OFF"; }

std::string_view to_string(ReportState s) {
    switch (s) {
        case ReportState::On: return "ON";
        case ReportState::Off: return "OFF";
        case ReportState::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

std::string_view to_string(Activity a) {
    switch (a) {
        case Activity::Resting: return "resting";
        case Activity::Walking: return "walking";
        case Activity::Drinking: return "drinking";
        case Activity::Dressing: return "dressing";
        case Activity::HairBrushing: return "hair_brushing";
        case Activity::UnpackingGroceries: return "unpacking_groceries";
        case Activity::CuttingFood: return "cutting_food";
    }
    return "?";
}

std::optional<SensorId> parse_sensor(std::string_view text) {
    if (text == "wrist") return SensorId::Wrist;
    if (text == "ankle") return SensorId::Ankle;
    return std::nullopt;
}

std::optional<MedState> parse_state(std::string_view text) {
    if (text == "ON") return MedState::On;
    if (text == "OFF") return MedState::Off;
    return std::nullopt;
}

std::optional<Activity> parse_activity(std::string_view text) {
    for (Activity a : kAllActivities)
        if (to_string(a) == text) return a;
    return std::nullopt;
}

bool is_office_activity(Activity a) {
    return std::find(kOfficeActivities.begin(), kOfficeActivities.end(), a) != kOfficeActivities.end();
}

const std::vector<double>& SensorStream::axis(std::size_t i) const {
    switch (i) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
    }
    throw std::out_of_range("axis index must be 0..2");
}

std::vector<double>& SensorStream::axis(std::size_t i) {
    return const_cast<std::vector<double>&>(std::as_const(*this).axis(i));
}

void SensorStream::validate() const {
    if (x.size() != y.size() || x.size() != z.size())
        throw InvariantError("sensor stream '" + std::string(to_string(id)) + "' has axes of unequal length");
    for (std::size_t a = 0; a < 3; ++a)
        for (double v : axis(a))
            if (!std::isfinite(v))
                throw InvariantError("sensor stream '" + std::string(to_string(id)) + "' contains a non-finite sample");
}

const std::vector<double>& SignalWindow::axis(std::size_t i) const {
    switch (i) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
    }
    throw std::out_of_range("axis index must be 0..2");
}

Recording::Recording(double sample_rate_hz, std::vector<SensorStream> streams,
                     std::optional<std::vector<MedState>> truth,
                     std::optional<std::vector<Activity>> activity, double start_time_s)
    : sample_rate_hz_(sample_rate_hz),
      start_time_s_(start_time_s),
      streams_(std::move(streams)),
      truth_(std::move(truth)),
      activity_(std::move(activity)) {
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
        throw InvariantError("sample rate must be positive");
    if (streams_.empty()) throw InvariantError("recording needs at least one sensor stream");
    std::sort(streams_.begin(), streams_.end(),
              [](const SensorStream& a, const SensorStream& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < streams_.size(); ++i)
        if (streams_[i].id == streams_[i - 1].id)
            throw InvariantError("duplicate stream for sensor '" + std::string(to_string(streams_[i].id)) + "'");
    for (const auto& s : streams_) s.validate();
    length_ = streams_.front().size();
    for (const auto& s : streams_)
        if (s.size() != length_) throw InvariantError("sensor streams have different lengths");
    if (truth_ && truth_->size() != length_) throw InvariantError("truth labels do not match recording length");
    if (activity_ && activity_->size() != length_)
        throw InvariantError("activity labels do not match recording length");
}

bool Recording::has_sensor(SensorId id) const {
    return std::any_of(streams_.begin(), streams_.end(), [id](const auto& s) { return s.id == id; });
}

const SensorStream& Recording::stream(SensorId id) const {
    for (const auto& s : streams_)
        if (s.id == id) return s;
    throw std::out_of_range("recording has no '" + std::string(to_string(id)) + "' stream");
}

std::vector<SensorId> Recording::sensor_ids() const {
    std::vector<SensorId> ids;
    for (const auto& s : streams_) ids.push_back(s.id);
    return ids;
}

Recording Recording::with_sensors(const std::vector<SensorId>& ids) const {
    std::vector<SensorStream> kept;
    for (SensorId id : ids) kept.push_back(stream(id));
    return Recording(sample_rate_hz_, std::move(kept), truth_, activity_, start_time_s_);
}

Recording Recording::with_streams(std::vector<SensorStream> streams) const {
    return Recording(sample_rate_hz_, std::move(streams), truth_, activity_, start_time_s_);
}

std::size_t window_samples_for(double sample_rate_hz, double window_s) {
    return static_cast<std::size_t>(std::lround(window_s * sample_rate_hz));
}

}  // namespace pdstate
