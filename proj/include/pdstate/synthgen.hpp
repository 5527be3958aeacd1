#pragma once

// Synthetic two-sensor gyroscope recordings with scheduled OFF/ON phases and
// activities. The waveforms are a validation scaffold built so that tremor-band
// power, movement amplitude and movement frequency differ between states; they
// are not a physiological model.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdstate/types.hpp"

namespace pdstate::synthgen {

enum class TremorSite { None, Wrist, Ankle };

std::string_view to_string(TremorSite s);
std::optional<TremorSite> parse_tremor_site(std::string_view text);

struct SubjectProfile {
    TremorSite tremor_site = TremorSite::Wrist;
    double tremor_frequency_hz = 5.0;     // [4, 6]
    double off_tremor_amplitude = 40.0;   // deg/s
    double on_attenuation = 0.1;          // ON tremor amplitude = off amplitude * on_attenuation
    double bradykinesia_factor = 0.5;     // (0, 1]; OFF voluntary movement is scaled by this
    double noise_floor = 1.0;             // deg/s, Gaussian sigma per axis
    std::uint64_t seed = 0;

    void validate() const;
};

struct ActivitySegment {
    Activity activity = Activity::Resting;
    double duration_s = 60.0;
};

struct Phase {
    MedState state = MedState::Off;
    std::vector<ActivitySegment> activities;

    double duration_s() const;
};

struct SessionSchedule {
    std::vector<Phase> phases;

    double duration_s() const;
    void validate() const;
};

/**
 * Renders a schedule for both sensors. Segment boundaries are placed at
 * round(cumulative_time * fs) so labels follow the schedule to the sample.
 * The output depends only on the arguments.
 */
Recording generate(const SubjectProfile& profile, const SessionSchedule& schedule, double sample_rate_hz = 128.0,
                   double start_time_s = 0.0);

struct Study {
    SubjectProfile profile;
    SessionSchedule training_schedule;
    SessionSchedule testing_schedule;
    Recording training;
    Recording testing;
};

/// Profile drawn from `seed`; the tremor site cycles none, wrist, ankle with seed % 3.
SubjectProfile default_profile(std::uint64_t seed);

/**
 * Training: 4 min OFF then 4 min ON, one minute of each office activity per
 * state. Testing starts after a gap: about 37 min OFF then 16 min ON, cycling
 * through all seven activities.
 */
Study default_study(std::uint64_t seed);

/// Configuration accepted by the `synth` subcommand.
struct SynthConfig {
    SubjectProfile profile;
    SessionSchedule schedule;
    double sample_rate_hz = 128.0;
    double start_time_s = 0.0;
};

/**
 * JSON form:
 * {"sample_rate_hz": 128, "start_time_s": 0,
 *  "profile": {"tremor_site": "wrist", "tremor_frequency_hz": 5, ...},
 *  "schedule": [{"state": "OFF", "activities": [{"activity": "walking", "duration_s": 60}]}]}
 * Missing profile fields keep their defaults.
 */
SynthConfig synth_config_from_json(const std::string& text);

}  // namespace pdstate::synthgen
