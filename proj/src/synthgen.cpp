#include "pdstate/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

namespace pdstate::synthgen {

std::string_view to_string(TremorSite s) {
    switch (s) {
        case TremorSite::None: return "none";
        case TremorSite::Wrist: return "wrist";
        case TremorSite::Ankle: return "ankle";
    }
    return "?";
}

std::optional<TremorSite> parse_tremor_site(std::string_view text) {
    if (text == "none") return TremorSite::None;
    if (text == "wrist") return TremorSite::Wrist;
    if (text == "ankle") return TremorSite::Ankle;
    return std::nullopt;
}

void SubjectProfile::validate() const {
    if (!(tremor_frequency_hz >= 4.0 && tremor_frequency_hz <= 6.0))
        throw InvariantError("tremor frequency must lie in [4, 6] Hz");
    if (!(off_tremor_amplitude >= 0.0) || !std::isfinite(off_tremor_amplitude))
        throw InvariantError("tremor amplitude must be non-negative");
    if (!(on_attenuation >= 0.0 && on_attenuation <= 1.0)) throw InvariantError("on_attenuation must lie in [0, 1]");
    if (!(bradykinesia_factor > 0.0 && bradykinesia_factor <= 1.0))
        throw InvariantError("bradykinesia_factor must lie in (0, 1]");
    if (!(noise_floor >= 0.0) || !std::isfinite(noise_floor)) throw InvariantError("noise floor must be non-negative");
}

double Phase::duration_s() const {
    double s = 0.0;
    for (const auto& a : activities) s += a.duration_s;
    return s;
}

double SessionSchedule::duration_s() const {
    double s = 0.0;
    for (const auto& p : phases) s += p.duration_s();
    return s;
}

void SessionSchedule::validate() const {
    if (phases.empty()) throw InvariantError("schedule has no phases");
    for (const auto& p : phases) {
        if (p.activities.empty()) throw InvariantError("schedule phase has no activities");
        for (const auto& a : p.activities)
            if (!(a.duration_s > 0.0) || !std::isfinite(a.duration_s))
                throw InvariantError("activity durations must be positive");
    }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kVoluntaryLimit = 400.0;
constexpr double kPhaseDiffusion = 0.4;  // rad^2 / s

/** Portable random source: mt19937_64 output is fixed by the standard, the distributions are ours. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        return r * std::cos(kTwoPi * u2);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

struct Component {
    SensorId sensor;
    double freq_hz;
    double amplitude;
    std::array<double, 3> axis_weight;
};

// Leg movement while seated at an arm task.
constexpr Component kSeatedAnkleSlow{SensorId::Ankle, 0.9, 4.0, {1.0, 0.5, 0.5}};
constexpr Component kSeatedAnkleFast{SensorId::Ankle, 1.5, 2.0, {0.5, 1.0, 0.6}};

// Voluntary-movement recipe per activity in the ON state.
std::vector<Component> recipe(Activity a) {
    using S = SensorId;
    switch (a) {
        case Activity::Resting:
            return {{S::Wrist, 0.9, 4.0, {1.0, 0.6, 0.4}},
                    {S::Wrist, 1.3, 2.0, {0.5, 1.0, 0.5}},
                    {S::Ankle, 0.9, 3.0, {1.0, 0.5, 0.5}},
                    {S::Ankle, 1.1, 1.5, {0.4, 1.0, 0.6}}};
        case Activity::Walking:
            return {{S::Ankle, 1.0, 110.0, {1.0, 0.35, 0.25}},
                    {S::Ankle, 2.0, 45.0, {1.0, 0.5, 0.4}},
                    {S::Ankle, 3.0, 15.0, {0.6, 1.0, 0.5}},
                    {S::Wrist, 1.0, 40.0, {1.0, 0.5, 0.3}},
                    {S::Wrist, 2.0, 12.0, {0.5, 1.0, 0.6}}};
        case Activity::Drinking:
            return {{S::Wrist, 0.5, 55.0, {0.6, 1.0, 0.5}},
                    {S::Wrist, 1.5, 25.0, {1.0, 0.6, 0.5}},
                    {S::Wrist, 2.8, 8.0, {0.5, 0.5, 1.0}},
                    kSeatedAnkleSlow,
                    kSeatedAnkleFast};
        case Activity::Dressing:
            return {{S::Wrist, 0.8, 65.0, {1.0, 0.8, 0.5}},
                    {S::Wrist, 2.2, 28.0, {0.6, 1.0, 0.7}},
                    {S::Ankle, 0.9, 18.0, {1.0, 0.6, 0.5}},
                    {S::Ankle, 1.8, 6.0, {0.5, 1.0, 0.5}}};
        case Activity::HairBrushing:
            return {{S::Wrist, 0.9, 55.0, {1.0, 0.6, 0.5}},
                    {S::Wrist, 1.9, 26.0, {0.6, 1.0, 0.4}},
                    {S::Wrist, 2.9, 8.0, {0.5, 0.5, 1.0}},
                    kSeatedAnkleSlow,
                    kSeatedAnkleFast};
        case Activity::UnpackingGroceries:
            return {{S::Wrist, 0.7, 60.0, {1.0, 0.7, 0.6}},
                    {S::Wrist, 1.7, 24.0, {0.6, 1.0, 0.5}},
                    {S::Ankle, 0.6, 22.0, {1.0, 0.5, 0.4}},
                    {S::Ankle, 1.4, 8.0, {0.5, 1.0, 0.5}}};
        case Activity::CuttingFood:
            return {{S::Wrist, 0.6, 45.0, {1.0, 0.5, 0.6}},
                    {S::Wrist, 2.3, 24.0, {0.6, 1.0, 0.5}},
                    {S::Wrist, 1.2, 15.0, {0.5, 0.6, 1.0}},
                    kSeatedAnkleSlow,
                    kSeatedAnkleFast};
    }
    return {};
}

}  // namespace

Recording generate(const SubjectProfile& profile, const SessionSchedule& schedule, double sample_rate_hz,
                   double start_time_s) {
    profile.validate();
    schedule.validate();
    if (!(sample_rate_hz > 0.0)) throw InvariantError("sample rate must be positive");

    const double total_s = schedule.duration_s();
    const auto n = static_cast<std::size_t>(std::llround(total_s * sample_rate_hz));
    std::array<SensorStream, 2> streams{SensorStream{SensorId::Wrist, {}, {}, {}},
                                        SensorStream{SensorId::Ankle, {}, {}, {}}};
    for (auto& s : streams)
        for (std::size_t a = 0; a < 3; ++a) s.axis(a).assign(n, 0.0);
    std::vector<MedState> truth(n);
    std::vector<Activity> activity(n);

    Rng rng(profile.seed);
    const double slow = 0.6 + 0.4 * profile.bradykinesia_factor;
    // Per-sample phase random walk: relative axis phases decorrelate over a few seconds.
    const double diffusion = std::sqrt(kPhaseDiffusion / sample_rate_hz);
    double elapsed = 0.0;
    for (const auto& phase : schedule.phases) {
        const bool off = phase.state == MedState::Off;
        const double amp_scale = off ? profile.bradykinesia_factor : 1.0;
        const double freq_scale = off ? slow : 1.0;
        for (const auto& seg : phase.activities) {
            const auto lo = static_cast<std::size_t>(std::llround(elapsed * sample_rate_hz));
            elapsed += seg.duration_s;
            const auto hi = std::min(n, static_cast<std::size_t>(std::llround(elapsed * sample_rate_hz)));
            for (std::size_t i = lo; i < hi; ++i) {
                truth[i] = phase.state;
                activity[i] = seg.activity;
            }
            for (const auto& c : recipe(seg.activity)) {
                const double amp = c.amplitude * amp_scale * rng.uniform(0.85, 1.15);
                const double f = c.freq_hz * freq_scale * rng.uniform(0.93, 1.07);
                const double mod_f = rng.uniform(0.02, 0.08);
                const double mod_phase = rng.uniform(0.0, kTwoPi);
                std::array<double, 3> phase0{};
                for (auto& p : phase0) p = rng.uniform(0.0, kTwoPi);
                auto& stream = streams[static_cast<std::size_t>(c.sensor)];
                for (std::size_t i = lo; i < hi; ++i) {
                    const double t = static_cast<double>(i) / sample_rate_hz;
                    const double envelope = amp * (1.0 + 0.25 * std::sin(kTwoPi * mod_f * t + mod_phase));
                    for (std::size_t a = 0; a < 3; ++a) {
                        stream.axis(a)[i] += envelope * c.axis_weight[a] * std::sin(kTwoPi * f * t + phase0[a]);
                        phase0[a] += diffusion * rng.normal();
                    }
                }
            }
        }
    }
    for (auto& s : streams)
        for (std::size_t a = 0; a < 3; ++a)
            for (double& v : s.axis(a)) v = std::clamp(v, -kVoluntaryLimit, kVoluntaryLimit);

    if (profile.tremor_site != TremorSite::None && profile.off_tremor_amplitude > 0.0) {
        auto& stream = streams[profile.tremor_site == TremorSite::Wrist ? 0 : 1];
        static constexpr std::array<double, 3> kTremorAxis = {1.0, 0.6, 0.3};
        const double env_phase = rng.uniform(0.0, kTwoPi);
        const double carrier_phase = rng.uniform(0.0, kTwoPi);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / sample_rate_hz;
            const double amp = profile.off_tremor_amplitude * (truth[i] == MedState::Off ? 1.0 : profile.on_attenuation);
            const double envelope = amp * (0.6 + 0.4 * std::sin(kTwoPi * 0.1 * t + env_phase));
            const double carrier = std::sin(kTwoPi * profile.tremor_frequency_hz * t + carrier_phase);
            for (std::size_t a = 0; a < 3; ++a) stream.axis(a)[i] += envelope * kTremorAxis[a] * carrier;
        }
    }

    if (profile.noise_floor > 0.0)
        for (auto& s : streams)
            for (std::size_t a = 0; a < 3; ++a)
                for (double& v : s.axis(a)) v += profile.noise_floor * rng.normal();

    return Recording(sample_rate_hz, {std::move(streams[0]), std::move(streams[1])}, std::move(truth),
                     std::move(activity), start_time_s);
}

SubjectProfile default_profile(std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    SubjectProfile p;
    p.tremor_site = static_cast<TremorSite>(seed % 3);
    p.tremor_frequency_hz = rng.uniform(4.3, 5.7);
    p.off_tremor_amplitude = rng.uniform(30.0, 60.0);
    p.on_attenuation = rng.uniform(0.03, 0.12);
    p.bradykinesia_factor = rng.uniform(0.4, 0.6);
    p.noise_floor = 1.0;
    p.seed = seed;
    return p;
}

namespace {

Phase office_phase(MedState state, Rng& rng) {
    std::array<Activity, 4> order = kOfficeActivities;
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1))]);
    Phase p{state, {}};
    for (Activity a : order) p.activities.push_back({a, 60.0});
    return p;
}

Phase daily_phase(MedState state, double target_s, Rng& rng, std::size_t& cursor) {
    Phase p{state, {}};
    double used = 0.0;
    while (used < target_s) {
        const Activity a = kAllActivities[cursor++ % kAllActivities.size()];
        double d = std::round(rng.uniform(60.0, 150.0));
        if (target_s - used - d < 60.0) d = target_s - used;
        p.activities.push_back({a, d});
        used += d;
    }
    return p;
}

}  // namespace

Study default_study(std::uint64_t seed) {
    const SubjectProfile profile = default_profile(seed);
    Rng rng(seed * 0x2545f4914f6cdd1dULL + 17);
    SessionSchedule training;
    training.phases = {office_phase(MedState::Off, rng), office_phase(MedState::On, rng)};
    SessionSchedule testing;
    std::size_t cursor = static_cast<std::size_t>(seed % kAllActivities.size());
    testing.phases = {daily_phase(MedState::Off, 37.0 * 60.0, rng, cursor),
                      daily_phase(MedState::On, 16.0 * 60.0, rng, cursor)};

    SubjectProfile test_profile = profile;
    test_profile.seed = profile.seed ^ 0x5851f42d4c957f2dULL;
    const double gap_s = 1800.0;
    Recording train_rec = generate(profile, training);
    Recording test_rec = generate(test_profile, testing, 128.0, train_rec.duration_s() + gap_s);
    return Study{profile, std::move(training), std::move(testing), std::move(train_rec), std::move(test_rec)};
}

SynthConfig synth_config_from_json(const std::string& text) {
    using nlohmann::json;
    SynthConfig cfg;
    try {
        const json j = json::parse(text);
        cfg.sample_rate_hz = j.value("sample_rate_hz", 128.0);
        cfg.start_time_s = j.value("start_time_s", 0.0);
        if (j.contains("profile")) {
            const auto& p = j.at("profile");
            if (p.contains("tremor_site")) {
                const auto site = parse_tremor_site(p.at("tremor_site").get<std::string>());
                if (!site) throw ParseError("unknown tremor_site '" + p.at("tremor_site").get<std::string>() + "'");
                cfg.profile.tremor_site = *site;
            }
            cfg.profile.tremor_frequency_hz = p.value("tremor_frequency_hz", cfg.profile.tremor_frequency_hz);
            cfg.profile.off_tremor_amplitude = p.value("off_tremor_amplitude", cfg.profile.off_tremor_amplitude);
            cfg.profile.on_attenuation = p.value("on_attenuation", cfg.profile.on_attenuation);
            cfg.profile.bradykinesia_factor = p.value("bradykinesia_factor", cfg.profile.bradykinesia_factor);
            cfg.profile.noise_floor = p.value("noise_floor", cfg.profile.noise_floor);
            cfg.profile.seed = p.value("seed", cfg.profile.seed);
        }
        for (const auto& ph : j.at("schedule")) {
            const auto state = parse_state(ph.at("state").get<std::string>());
            if (!state) throw ParseError("phase state must be ON or OFF");
            Phase phase{*state, {}};
            for (const auto& a : ph.at("activities")) {
                const auto act = parse_activity(a.at("activity").get<std::string>());
                if (!act) throw ParseError("unknown activity '" + a.at("activity").get<std::string>() + "'");
                phase.activities.push_back({*act, a.at("duration_s").get<double>()});
            }
            cfg.schedule.phases.push_back(std::move(phase));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed synth config: ") + e.what());
    }
    cfg.profile.validate();
    cfg.schedule.validate();
    return cfg;
}

}  // namespace pdstate::synthgen
