#pragma once

// Core domain types shared by every stage of the medication-state pipeline.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdstate {

/** Raised when a constructed value would violate one of its invariants. */
class InvariantError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/** Raised on malformed input files. Carries the offending line when known. */
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SensorId { Wrist = 0, Ankle = 1 };

enum class MedState { On, Off };

enum class ReportState { On, Off, Inconclusive };

enum class Activity {
    Resting = 0,
    Walking,
    Drinking,
    Dressing,
    HairBrushing,
    UnpackingGroceries,
    CuttingFood,
};

inline constexpr std::size_t kActivityCount = 7;
inline constexpr std::array<Activity, kActivityCount> kAllActivities = {
    Activity::Resting,      Activity::Walking,            Activity::Drinking, Activity::Dressing,
    Activity::HairBrushing, Activity::UnpackingGroceries, Activity::CuttingFood,
};
// Activities that can be performed during an office visit; training data is
// drawn from these only.
inline constexpr std::array<Activity, 4> kOfficeActivities = {
    Activity::Walking, Activity::Drinking, Activity::Resting, Activity::Dressing};

std::string_view to_string(SensorId id);
std::string_view to_string(MedState s);
std::string_view to_string(ReportState s);
std::string_view to_string(Activity a);

std::optional<SensorId> parse_sensor(std::string_view text);
std::optional<MedState> parse_state(std::string_view text);
std::optional<Activity> parse_activity(std::string_view text);

bool is_office_activity(Activity a);

/** Angular velocity (deg/s) of one sensor, three axes. */
struct SensorStream {
    SensorId id = SensorId::Wrist;
    std::vector<double> x, y, z;

    std::size_t size() const { return x.size(); }
    const std::vector<double>& axis(std::size_t i) const;
    std::vector<double>& axis(std::size_t i);

    /// Throws InvariantError on unequal axes or non-finite samples.
    void validate() const;
};

/**
 * A multi-sensor recording sampled on a common clock.
 *
 * Streams are kept sorted by sensor id (wrist first). Truth and activity
 * labels are optional but, when present, carry one entry per sample.
 */
class Recording {
public:
    Recording(double sample_rate_hz, std::vector<SensorStream> streams,
              std::optional<std::vector<MedState>> truth = std::nullopt,
              std::optional<std::vector<Activity>> activity = std::nullopt,
              double start_time_s = 0.0);

    double sample_rate_hz() const { return sample_rate_hz_; }
    double start_time_s() const { return start_time_s_; }
    std::size_t length_samples() const { return length_; }
    double duration_s() const { return static_cast<double>(length_) / sample_rate_hz_; }

    const std::vector<SensorStream>& streams() const { return streams_; }
    bool has_sensor(SensorId id) const;
    const SensorStream& stream(SensorId id) const;
    std::vector<SensorId> sensor_ids() const;

    const std::optional<std::vector<MedState>>& truth() const { return truth_; }
    const std::optional<std::vector<Activity>>& activity() const { return activity_; }

    /// Same recording restricted to a subset of its sensors.
    Recording with_sensors(const std::vector<SensorId>& ids) const;
    /// Same recording with every stream replaced (labels and clock kept).
    Recording with_streams(std::vector<SensorStream> streams) const;

private:
    double sample_rate_hz_;
    double start_time_s_;
    std::size_t length_ = 0;
    std::vector<SensorStream> streams_;
    std::optional<std::vector<MedState>> truth_;
    std::optional<std::vector<Activity>> activity_;
};

/** One 5 s, three-axis segment from one sensor. */
struct SignalWindow {
    SensorId sensor = SensorId::Wrist;
    std::vector<double> x, y, z;
    std::size_t start_sample = 0;
    std::optional<MedState> label;
    std::optional<Activity> activity;

    std::size_t size() const { return x.size(); }
    const std::vector<double>& axis(std::size_t i) const;
};

/** Window duration in samples for a sample rate: round(5 * fs). */
std::size_t window_samples_for(double sample_rate_hz, double window_s = 5.0);

// Sign convention: OFF is the positive class (+1) for the classifier.
inline constexpr double label_value(MedState s) { return s == MedState::Off ? 1.0 : -1.0; }

}  // namespace pdstate
