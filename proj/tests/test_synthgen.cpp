#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pdstate/features.hpp"
#include "pdstate/featselect.hpp"
#include "pdstate/inference.hpp"
#include "pdstate/preprocess.hpp"
#include "pdstate/synthgen.hpp"

using namespace pdstate;
using namespace pdstate::synthgen;

namespace {

SessionSchedule two_phase(Activity a, std::size_t segments, double seconds) {
    SessionSchedule s;
    s.phases = {{MedState::Off, {}}, {MedState::On, {}}};
    for (auto& p : s.phases)
        for (std::size_t i = 0; i < segments; ++i) p.activities.push_back({a, seconds});
    return s;
}

struct StateMeans {
    double off = 0, on = 0;
};

// Mean of a per-window statistic over OFF and ON windows of one sensor axis.
template <typename Stat>
StateMeans per_state_mean(const Recording& r, SensorId sensor, std::size_t axis, Stat stat) {
    const auto lists = preprocess::segment(r);
    const auto& windows = lists[sensor == SensorId::Wrist ? 0 : 1];
    const auto plan = preprocess::plan_windows(r);
    StateMeans m;
    double n_off = 0, n_on = 0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const double v = stat(windows[w].axis(axis));
        if (*plan.windows[w].label == MedState::Off) {
            m.off += v;
            ++n_off;
        } else {
            m.on += v;
            ++n_on;
        }
    }
    m.off /= n_off;
    m.on /= n_on;
    return m;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

TEST(Generate, TremorBandPowerSeparatesStates) {
    SubjectProfile p;
    p.tremor_site = TremorSite::Wrist;
    p.off_tremor_amplitude = 50;
    p.on_attenuation = 0.05;
    p.seed = 3;
    SessionSchedule s;
    s.phases = {{MedState::Off, {}}, {MedState::On, {}}};
    for (auto& phase : s.phases)
        for (Activity a : kOfficeActivities) phase.activities.push_back({a, 60});
    const Recording r = generate(p, s);
    const auto m = per_state_mean(r, SensorId::Wrist, 0, [](const std::vector<double>& x) {
        return oracle::band_power(oracle::periodogram(x), 0.2, 4.0, 6.0);
    });
    EXPECT_GT(m.off, 10 * m.on);
}

TEST(Generate, SlowerSmallerWalkingWhenOff) {
    SubjectProfile p;
    p.tremor_site = TremorSite::None;
    p.bradykinesia_factor = 0.5;
    p.seed = 4;
    const Recording r = generate(p, two_phase(Activity::Walking, 5, 60));
    const auto m = per_state_mean(r, SensorId::Ankle, 0, [](const std::vector<double>& x) { return oracle::moments(x).sd; });
    EXPECT_NEAR(m.off / m.on, 0.5, 0.1);
}

TEST(Generate, SameSeedSameBits) {
    const auto study = default_study(5);
    const Recording a = generate(study.profile, study.training_schedule);
    EXPECT_EQ(a.stream(SensorId::Wrist).x, study.training.stream(SensorId::Wrist).x);
    EXPECT_EQ(a.stream(SensorId::Ankle).z, study.training.stream(SensorId::Ankle).z);
    SubjectProfile other = study.profile;
    other.seed += 1;
    EXPECT_NE(generate(other, study.training_schedule).stream(SensorId::Wrist).x, a.stream(SensorId::Wrist).x);
}

TEST(Generate, SignalsAreFiniteAndBounded) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto study = default_study(seed);
        const double bound = 400 + study.profile.off_tremor_amplitude + 7 * study.profile.noise_floor;
        for (const Recording* r : {&study.training, &study.testing})
            for (const auto& s : r->streams())
                for (std::size_t a = 0; a < 3; ++a) {
                    const auto& v = s.axis(a);
                    EXPECT_TRUE(std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }));
                    EXPECT_LE(max_abs(v), bound);
                }
    }
}

TEST(Generate, LabelsFollowTheScheduleToTheSample) {
    SessionSchedule s;
    s.phases = {{MedState::Off, {{Activity::Resting, 10.3}, {Activity::Walking, 7.7}}},
                {MedState::On, {{Activity::Drinking, 6.01}}}};
    const Recording r = generate({}, s);
    ASSERT_EQ(r.length_samples(), static_cast<std::size_t>(std::llround(24.01 * 128)));
    const auto& truth = *r.truth();
    const auto& act = *r.activity();
    const std::size_t b1 = std::llround(10.3 * 128), b2 = std::llround(18.0 * 128);
    for (std::size_t i = 0; i < r.length_samples(); ++i) {
        EXPECT_EQ(truth[i], i < b2 ? MedState::Off : MedState::On) << i;
        EXPECT_EQ(act[i], i < b1 ? Activity::Resting : i < b2 ? Activity::Walking : Activity::Drinking) << i;
    }
}

TEST(Generate, InvalidInputs) {
    SubjectProfile p;
    p.tremor_frequency_hz = 7;
    EXPECT_THROW(generate(p, two_phase(Activity::Resting, 1, 10)), InvariantError);
    p = {};
    p.bradykinesia_factor = 0;
    EXPECT_THROW(generate(p, two_phase(Activity::Resting, 1, 10)), InvariantError);
    p = {};
    p.on_attenuation = 1.5;
    EXPECT_THROW(p.validate(), InvariantError);
    EXPECT_THROW(generate({}, SessionSchedule{}), InvariantError);
    EXPECT_THROW(generate({}, two_phase(Activity::Resting, 1, -1)), InvariantError);
}

TEST(DefaultStudy, TrainingMatchesTheProtocol) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto study = default_study(seed);
        const auto& truth = *study.training.truth();
        const double off_min = static_cast<double>(std::count(truth.begin(), truth.end(), MedState::Off)) / 128 / 60;
        const double on_min = static_cast<double>(std::count(truth.begin(), truth.end(), MedState::On)) / 128 / 60;
        EXPECT_GE(off_min, 3.5);
        EXPECT_LE(off_min, 4.5);
        EXPECT_GE(on_min, 3.5);
        EXPECT_LE(on_min, 4.5);
        const std::set<Activity> seen(study.training.activity()->begin(), study.training.activity()->end());
        EXPECT_EQ(seen, std::set<Activity>(kOfficeActivities.begin(), kOfficeActivities.end()));
        EXPECT_EQ(study.profile.tremor_site, static_cast<TremorSite>(seed % 3));
    }
}

TEST(DefaultStudy, TestingCoversEveryActivityAfterTraining) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto study = default_study(seed);
        const std::set<Activity> seen(study.testing.activity()->begin(), study.testing.activity()->end());
        EXPECT_EQ(seen.size(), 7u);
        EXPECT_GT(study.testing.start_time_s(), study.training.start_time_s() + study.training.duration_s());
        const auto& truth = *study.testing.truth();
        const double off_min = static_cast<double>(std::count(truth.begin(), truth.end(), MedState::Off)) / 128 / 60;
        EXPECT_NEAR(off_min, 37.0, 0.5);
        EXPECT_NEAR(study.testing.duration_s() / 60 - off_min, 16.0, 0.5);
    }
}

TEST(DefaultStudy, TremorBandFeatureIsScreenedIn) {
    for (std::uint64_t seed : {1u, 2u, 4u, 5u}) {
        const auto study = default_study(seed);
        ASSERT_LT(study.profile.on_attenuation, 0.2);
        ASSERT_GE(study.profile.off_tremor_amplitude, 5 * study.profile.noise_floor);
        const auto plan = preprocess::plan_windows(study.training);
        const auto filtered = preprocess::filter_recording(preprocess::default_bandpass(128.0), study.training);
        const auto fm = features::extract_recording(filtered, plan);
        std::vector<double> labels;
        for (MedState s : inference::window_truth(plan)) labels.push_back(s == MedState::Off ? 1.0 : -1.0);
        const auto res = featselect::screen(fm.values, labels);
        const std::string sensor = study.profile.tremor_site == TremorSite::Wrist ? "wrist" : "ankle";
        const auto reg = features::registry_for(fm.sensors);
        std::size_t hit = reg.size();
        for (std::size_t i = 0; i < reg.size(); ++i)
            if (reg[i].sensor == sensor && reg[i].name == "band_power_4_6" && reg[i].axis == "X") hit = i;
        ASSERT_LT(hit, reg.size());
        EXPECT_TRUE(res.features[hit].selected) << seed;
        EXPECT_LT(res.features[hit].p_value, 0.01) << seed;
    }
}

TEST(SynthConfig, ParsesProfileAndSchedule) {
    const auto cfg = synth_config_from_json(R"({
        "sample_rate_hz": 128, "start_time_s": 42,
        "profile": {"tremor_site": "ankle", "tremor_frequency_hz": 4.5, "seed": 9},
        "schedule": [{"state": "OFF", "activities": [{"activity": "walking", "duration_s": 30}]},
                     {"state": "ON", "activities": [{"activity": "cutting_food", "duration_s": 20}]}]})");
    EXPECT_EQ(cfg.profile.tremor_site, TremorSite::Ankle);
    EXPECT_EQ(cfg.profile.tremor_frequency_hz, 4.5);
    EXPECT_EQ(cfg.profile.seed, 9u);
    EXPECT_EQ(cfg.profile.off_tremor_amplitude, SubjectProfile{}.off_tremor_amplitude);
    EXPECT_EQ(cfg.start_time_s, 42);
    ASSERT_EQ(cfg.schedule.phases.size(), 2u);
    EXPECT_EQ(cfg.schedule.phases[1].state, MedState::On);
    EXPECT_EQ(cfg.schedule.phases[1].activities[0].activity, Activity::CuttingFood);
    EXPECT_EQ(cfg.schedule.duration_s(), 50);
}

TEST(SynthConfig, RejectsBadInput) {
    EXPECT_ANY_THROW(synth_config_from_json("{"));
    EXPECT_ANY_THROW(synth_config_from_json(R"({"profile": {"tremor_site": "elbow"}, "schedule": []})"));
    EXPECT_ANY_THROW(synth_config_from_json(R"({"schedule": [{"state": "MAYBE", "activities": []}]})"));
    EXPECT_ANY_THROW(synth_config_from_json(R"({"profile": {}})"));
}
