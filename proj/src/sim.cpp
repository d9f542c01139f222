#include "kvlu/sim.hpp"

#include "kvlu/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace kvlu::sim {

namespace {

constexpr double kGravity = 9.80665;
constexpr double kVertical = 90.0;

// Independent deterministic generator per purpose, derived from the seed.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t purpose)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      purpose};
    return std::mt19937_64(seq);
}

enum Purpose : std::uint32_t {
    kDrift = 1,
    kPressureNoiseL = 2,
    kPressureNoiseR = 3,
    kPitchNoiseL = 4,
    kPitchNoiseR = 5,
    kGrfNoiseL = 6,
    kGrfNoiseR = 7,
};

double raised_cosine(double x) { return 0.5 * (1.0 - std::cos(std::numbers::pi * x)); }

// Laid-out script: every activity with absolute times.
struct Segment {
    enum Kind { StandK, WalkK, LiftK } kind;
    double start;
    double end;
    Speed speed = Speed::Normal;
    // Lift phases, absolute: reach [start, hold0), hold [hold0, hold1),
    // return [hold1, stand0), stand [stand0, end).
    double hold0 = 0, hold1 = 0, stand0 = 0;
    double target_cm = 0;
    double load_cm = 0;
    std::string level;
};

Segment make_segment(Segment::Kind kind, double start, double end)
{
    Segment g{};
    g.kind = kind;
    g.start = start;
    g.end = end;
    return g;
}

std::vector<Segment> lay_out(const SimConfig& c)
{
    std::vector<Segment> out;
    double t = 0.0;
    for (const auto& a : c.script) {
        if (const auto* s = std::get_if<Stand>(&a)) {
            out.push_back(make_segment(Segment::StandK, t, t + s->duration_s));
            t += s->duration_s;
        } else if (const auto* w = std::get_if<Walk>(&a)) {
            Segment g = make_segment(Segment::WalkK, t, t + w->duration_s);
            g.speed = w->speed;
            out.push_back(g);
            t += w->duration_s;
        } else {
            const auto& l = std::get<LiftSet>(a);
            auto off = c.wrist_above_load_cm.find(l.level);
            const double offset = off == c.wrist_above_load_cm.end() ? 0.0 : off->second;
            for (int r = 0; r < l.repetitions; ++r) {
                Segment g = make_segment(Segment::LiftK, t, 0.0);
                g.hold0 = t + c.lift_transition_s;
                g.hold1 = g.hold0 + l.hold_s;
                g.stand0 = g.hold1 + c.lift_transition_s;
                g.end = g.stand0 + l.stand_s;
                g.load_cm = l.level_cm;
                g.target_cm = l.level_cm + offset;
                g.level = l.level;
                out.push_back(g);
                t = g.end;
            }
        }
    }
    return out;
}

const Segment* segment_at(const std::vector<Segment>& segs, double t)
{
    auto it = std::upper_bound(segs.begin(), segs.end(), t,
                               [](double x, const Segment& s) { return x < s.end; });
    return it == segs.end() ? &segs.back() : &*it;
}

double frac(double x) { return x - std::floor(x); }

struct WristState {
    double height_cm;
    double pitch_deg;
    std::optional<double> load_cm;
};

// Phase of the stride (0 at left heel strike) inside a walk segment.
double stride_phase(const Segment& g, double cycle_s, double t)
{
    return frac((t - g.start) / cycle_s);
}

WristState wrist_state(const SimConfig& c, const Segment& g, Side side, double t)
{
    const double standing = c.wrist_ratio * c.body_height_cm;
    switch (g.kind) {
    case Segment::StandK:
        return {standing, kVertical, std::nullopt};
    case Segment::WalkK: {
        const auto& shape = c.gait(g.speed);
        // Left mid-stance sits at stance_fraction/2 of the stride, the right
        // one half a stride later. Each wrist peaks at the opposite foot's.
        const double mid_left = 0.5 * c.stance_fraction;
        const double peak = side == Side::Right ? mid_left : mid_left + 0.5;
        const double phi = stride_phase(g, shape.cycle_s, t) - peak;
        const double pitch =
            kVertical - shape.arm_swing_deg * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phi));
        const double rise =
            c.arm_length_cm * (1.0 - std::sin(pitch * std::numbers::pi / 180.0));
        return {standing + rise, pitch, std::nullopt};
    }
    case Segment::LiftK:
        if (t < g.hold0)
            return {standing + (g.target_cm - standing) * raised_cosine((t - g.start) /
                                                                         (g.hold0 - g.start)),
                    c.lift_pitch_deg, std::nullopt};
        if (t < g.hold1)
            return {g.target_cm, c.lift_pitch_deg, g.load_cm};
        if (t < g.stand0)
            return {g.target_cm + (standing - g.target_cm) *
                                      raised_cosine((t - g.hold1) / (g.stand0 - g.hold1)),
                    c.lift_pitch_deg, std::nullopt};
        return {standing, kVertical, std::nullopt};
    }
    return {standing, kVertical, std::nullopt};
}

struct FootLoad {
    double heel = 0, midfoot = 0, forefoot = 0;
    PhaseLabel phase = PhaseLabel::StanceOther;
};

FootLoad foot_load(const SimConfig& c, const Segment& g, Side side, double t)
{
    const double weight = c.body_mass_kg * kGravity;
    if (g.kind != Segment::WalkK)
        return {0.45 * weight / 2, 0.15 * weight / 2, 0.40 * weight / 2, PhaseLabel::StanceOther};
    const auto& shape = c.gait(g.speed);
    double phi = stride_phase(g, shape.cycle_s, t);
    if (side == Side::Right)
        phi = frac(phi - 0.5);
    if (phi >= c.stance_fraction)
        return {0, 0, 0, PhaseLabel::Swing};
    const double u = phi / c.stance_fraction;
    auto bump = [](double x, double lo, double hi) {
        return x > lo && x < hi ? std::sin(std::numbers::pi * (x - lo) / (hi - lo)) : 0.0;
    };
    FootLoad f;
    f.heel = 0.7 * weight * bump(u, 0.0, 0.7);
    f.midfoot = 0.2 * weight * bump(u, 0.1, 0.9);
    f.forefoot = 0.7 * weight * bump(u, 0.3, 1.0);
    f.phase = u > 0.3 && u < 0.7 ? PhaseLabel::FootFlat : PhaseLabel::StanceOther;
    return f;
}

std::vector<double> timeline(double duration, double rate)
{
    std::vector<double> t;
    for (std::size_t k = 0;; ++k) {
        const double x = static_cast<double>(k) / rate;
        if (x >= duration)
            break;
        t.push_back(x);
    }
    return t;
}

// Sample-resolution runs of `mask` as [t_first, t_last + dt) intervals.
template <class Pred>
std::vector<IntervalLabel> runs(const std::vector<double>& t, double dt, Pred pred,
                                IntervalSide side, PhaseLabel label)
{
    std::vector<IntervalLabel> out;
    std::size_t i = 0;
    while (i < t.size()) {
        if (!pred(i)) {
            ++i;
            continue;
        }
        const std::size_t first = i;
        while (i + 1 < t.size() && pred(i + 1))
            ++i;
        out.push_back({t[first], t[i] + dt, side, label});
        ++i;
    }
    return out;
}

}  // namespace

std::string_view to_string(Speed s)
{
    switch (s) {
    case Speed::Slow: return "slow";
    case Speed::Normal: return "normal";
    case Speed::Fast: return "fast";
    }
    return "normal";
}

std::optional<Speed> parse_speed(std::string_view text)
{
    if (text == "slow") return Speed::Slow;
    if (text == "normal") return Speed::Normal;
    if (text == "fast") return Speed::Fast;
    return std::nullopt;
}

const GaitShape& SimConfig::gait(Speed s) const
{
    return s == Speed::Slow ? slow : s == Speed::Fast ? fast : normal;
}

double SimConfig::a_true() const
{
    return a_true_cm_per_pa != 0.0 ? a_true_cm_per_pa
                                   : PressureHeightModel::hydrostatic().a_cm_per_pa;
}

double SimConfig::total_duration() const
{
    const auto segs = lay_out(*this);
    return segs.empty() ? 0.0 : segs.back().end;
}

void SimConfig::validate() const
{
    auto fail = [](const std::string& what) {
        throw Error(Errc::InvalidConfig, "sim::SimConfig", what);
    };
    if (script.empty())
        fail("activity script is empty");
    for (const auto& a : script) {
        if (const auto* s = std::get_if<Stand>(&a); s && !(s->duration_s > 0))
            fail("stand duration must be > 0");
        if (const auto* w = std::get_if<Walk>(&a); w && !(w->duration_s > 0))
            fail("walk duration must be > 0");
        if (const auto* l = std::get_if<LiftSet>(&a)) {
            if (l->repetitions < 1)
                fail("lift repetitions must be >= 1");
            if (!(l->hold_s > 0) || !(l->stand_s > 0))
                fail("lift hold and stand durations must be > 0");
        }
    }
    if (!(body_height_cm > 0) || !(wrist_ratio > 0 && wrist_ratio < 1) || !(body_mass_kg > 0))
        fail("anthropometry out of range");
    for (const auto* g : {&slow, &normal, &fast})
        if (!(g->cycle_s > 0) || g->arm_swing_deg < 0 || g->arm_swing_deg > 180)
            fail("gait shape out of range");
    if (!(stance_fraction > 0 && stance_fraction < 1))
        fail("stance_fraction must be in (0, 1)");
    if (!(lift_transition_s > 0))
        fail("lift_transition_s must be > 0");
    if (!(wrist_rate_hz > 0) || !(insole_rate_hz > 0))
        fail("sample rates must be > 0");
    if (noise.pressure_pa < 0 || noise.pitch_deg < 0 || noise.grf_n < 0 ||
        drift.random_walk_pa_per_sqrt_s < 0)
        fail("noise magnitudes must be >= 0");
    if (!(drift.sin_period_s > 0))
        fail("sin_period_s must be > 0");
    if (a_true() >= 0)
        fail("a_true must be negative");
}

SimConfig default_protocol(std::uint64_t seed, int reps)
{
    SimConfig c;
    c.seed = seed;
    c.script = {Stand{30.0}, Walk{60.0, Speed::Slow}, Walk{60.0, Speed::Normal},
                Walk{60.0, Speed::Fast}, Stand{10.0}};
    const std::pair<const char*, double> levels[] = {
        {"ground", 0.0}, {"knee", 20 * kInchToCm}, {"waist", 40 * kInchToCm},
        {"shoulder", 55 * kInchToCm}};
    for (auto [name, cm] : levels)
        c.script.push_back(LiftSet{name, cm, reps});
    return c;
}

DriftTrace inject_drift(std::vector<WristSample>& samples, const DriftSpec& spec,
                        std::uint64_t seed)
{
    DriftTrace d;
    if (samples.empty())
        return d;
    auto rng = stream_rng(seed, kDrift);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double t0 = samples.front().t;
    double walk = 0.0;
    d.offset_pa.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t = samples[i].t - t0;
        if (i > 0 && spec.random_walk_pa_per_sqrt_s > 0)
            walk += spec.random_walk_pa_per_sqrt_s *
                    std::sqrt(samples[i].t - samples[i - 1].t) * normal(rng);
        const double off =
            spec.linear_pa_per_s * t +
            spec.sin_amplitude_pa *
                std::sin(2.0 * std::numbers::pi * t / spec.sin_period_s + spec.sin_phase_rad) +
            walk;
        samples[i].pressure_pa += off;
        d.offset_pa.push_back(off);
    }
    return d;
}

SimSession generate_session(const SimConfig& c)
{
    c.validate();
    const auto segs = lay_out(c);
    const double duration = segs.back().end;
    const double a = c.a_true();

    SimSession out;
    out.anthro = {c.body_height_cm, c.wrist_ratio};

    // Wrist streams and truth.
    const auto tw = timeline(duration, c.wrist_rate_hz);
    const double standing = c.wrist_ratio * c.body_height_cm;
    std::vector<double> height(tw.size());
    std::vector<bool> eligible(tw.size());
    out.truth.samples.resize(tw.size());
    for (Side side : {Side::Left, Side::Right}) {
        WristStream ws{side, {}};
        ws.samples.resize(tw.size());
        for (std::size_t i = 0; i < tw.size(); ++i) {
            const auto st = wrist_state(c, *segment_at(segs, tw[i]), side, tw[i]);
            ws.samples[i] = {tw[i], c.p0_pa + st.height_cm / a, st.pitch_deg, side};
            if (side == Side::Left) {
                height[i] = st.height_cm;
                out.truth.samples[i] = {tw[i], st.height_cm, st.load_cm};
                eligible[i] = st.pitch_deg > 58.5 && st.height_cm == standing;
            }
        }
        const auto drift = inject_drift(ws.samples, c.drift, c.seed);
        if (side == Side::Left)
            out.truth.drift_pa = drift.offset_pa;
        auto prng = stream_rng(c.seed, side == Side::Left ? kPressureNoiseL : kPressureNoiseR);
        auto arng = stream_rng(c.seed, side == Side::Left ? kPitchNoiseL : kPitchNoiseR);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& s : ws.samples) {
            if (c.noise.pressure_pa > 0)
                s.pressure_pa += c.noise.pressure_pa * normal(prng);
            if (c.noise.pitch_deg > 0)
                s.pitch_deg = std::clamp(s.pitch_deg + c.noise.pitch_deg * normal(arng), -180.0,
                                         180.0);
        }
        out.wrist.push_back(std::move(ws));
    }
    const double dtw = 1.0 / c.wrist_rate_hz;
    for (const auto& r : runs(tw, dtw, [&](std::size_t i) { return bool(eligible[i]); },
                              IntervalSide::Both, PhaseLabel::Standing))
        out.truth.kvlu_eligible.push_back(r.span());

    // Insoles.
    const auto ti = timeline(duration, c.insole_rate_hz);
    const double dti = 1.0 / c.insole_rate_hz;
    for (Side side : {Side::Left, Side::Right}) {
        InsoleStream is{side, default_region_map(), {}};
        const auto& map = is.regions;
        const double n_heel = static_cast<double>(map.count(Region::Heel));
        const double n_mid = static_cast<double>(map.count(Region::Midfoot));
        const double n_fore = static_cast<double>(map.count(Region::Forefoot));
        auto rng = stream_rng(c.seed, side == Side::Left ? kGrfNoiseL : kGrfNoiseR);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double cell_sigma = c.noise.grf_n / std::sqrt(static_cast<double>(kInsoleCells));
        std::vector<PhaseLabel> phase(ti.size());
        is.samples.resize(ti.size());
        for (std::size_t i = 0; i < ti.size(); ++i) {
            const auto f = foot_load(c, *segment_at(segs, ti[i]), side, ti[i]);
            phase[i] = f.phase;
            auto& s = is.samples[i];
            s.t = ti[i];
            s.side = side;
            for (std::size_t k = 0; k < kInsoleCells; ++k) {
                double v = 0.0;
                switch (map.at(k)) {
                case Region::Heel: v = f.heel / n_heel; break;
                case Region::Midfoot: v = f.midfoot / n_mid; break;
                default: v = f.forefoot / n_fore; break;
                }
                if (cell_sigma > 0)
                    v = std::max(0.0, v + cell_sigma * normal(rng));
                s.cells[k] = v;
            }
        }
        const auto iside = to_interval_side(side);
        for (PhaseLabel l : {PhaseLabel::Swing, PhaseLabel::FootFlat}) {
            auto r = runs(ti, dti, [&](std::size_t i) { return phase[i] == l; }, iside, l);
            out.truth.phases.insert(out.truth.phases.end(), r.begin(), r.end());
        }
        (side == Side::Left ? out.left : out.right) = std::move(is);
    }
    std::sort(out.truth.phases.begin(), out.truth.phases.end(),
              [](const IntervalLabel& x, const IntervalLabel& y) { return x.start < y.start; });

    // Activity labels, lift holds and cycle counts.
    for (const auto& g : segs) {
        const PhaseLabel l = g.kind == Segment::WalkK ? PhaseLabel::Walking : PhaseLabel::Standing;
        if (!out.truth.activities.empty() && out.truth.activities.back().label == l)
            out.truth.activities.back().end = g.end;
        else
            out.truth.activities.push_back({g.start, g.end, IntervalSide::Both, l});
        if (g.kind == Segment::LiftK) {
            out.truth.lifts.push_back({g.hold0, g.hold1, IntervalSide::Both, PhaseLabel::Unknown});
            out.truth.lift_levels.push_back(g.level);
        }
        if (g.kind == Segment::WalkK) {
            const double T = c.gait(g.speed).cycle_s;
            const double d = g.end - g.start;
            out.truth.cycles_left += static_cast<int>(std::ceil(d / T));
            out.truth.cycles_right += static_cast<int>(std::ceil(d / T - 0.5));
        }
    }
    return out;
}

std::filesystem::path write_session(const SimSession& s, const SimConfig& cfg,
                                    const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f)
            throw Error(Errc::Io, "sim::write_session", "cannot write " + (dir / name).string());
        return f;
    };
    {
        std::vector<WristSample> all;
        for (const auto& w : s.wrist)
            all.insert(all.end(), w.samples.begin(), w.samples.end());
        std::stable_sort(all.begin(), all.end(),
                         [](const WristSample& x, const WristSample& y) { return x.t < y.t; });
        auto f = open("wrist.csv");
        ingest::write_wrist_csv(f, all);
    }
    {
        std::vector<InsoleSample> all(s.left.samples);
        all.insert(all.end(), s.right.samples.begin(), s.right.samples.end());
        std::stable_sort(all.begin(), all.end(),
                         [](const InsoleSample& x, const InsoleSample& y) { return x.t < y.t; });
        auto f = open("insole.csv");
        ingest::write_insole_csv(f, all);
    }
    {
        auto f = open("truth.csv");
        ingest::write_truth_csv(f, s.truth.samples, true);
    }
    ingest::SessionManifest m;
    m.subject_id = cfg.subject_id;
    m.body_height_cm = cfg.body_height_cm;
    m.wrist_ratio = cfg.wrist_ratio;
    m.wrist = {"wrist.csv"};
    m.insole = {"insole.csv"};
    m.truth = "truth.csv";
    for (const auto& a : cfg.script)
        if (const auto* l = std::get_if<LiftSet>(&a))
            m.levels[l->level] = l->level_cm;
    const auto path = dir / "manifest.json";
    ingest::write_manifest(path, m);
    return path;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json shape_json(const GaitShape& g) { return {{"cycle_s", g.cycle_s}, {"arm_swing_deg", g.arm_swing_deg}}; }

void read_shape(const json& j, GaitShape& g)
{
    g.cycle_s = j.value("cycle_s", g.cycle_s);
    g.arm_swing_deg = j.value("arm_swing_deg", g.arm_swing_deg);
}

}  // namespace

SimConfig config_from_json(const std::string& text)
{
    SimConfig c;
    try {
        const json j = json::parse(text);
        c.seed = j.value("seed", c.seed);
        c.subject_id = j.value("subject_id", c.subject_id);
        c.body_height_cm = j.value("body_height_cm", c.body_height_cm);
        c.wrist_ratio = j.value("wrist_ratio", c.wrist_ratio);
        c.body_mass_kg = j.value("body_mass_kg", c.body_mass_kg);
        c.stance_fraction = j.value("stance_fraction", c.stance_fraction);
        c.arm_length_cm = j.value("arm_length_cm", c.arm_length_cm);
        c.lift_pitch_deg = j.value("lift_pitch_deg", c.lift_pitch_deg);
        c.lift_transition_s = j.value("lift_transition_s", c.lift_transition_s);
        c.p0_pa = j.value("p0_pa", c.p0_pa);
        c.a_true_cm_per_pa = j.value("a_true_cm_per_pa", c.a_true_cm_per_pa);
        c.wrist_rate_hz = j.value("wrist_rate_hz", c.wrist_rate_hz);
        c.insole_rate_hz = j.value("insole_rate_hz", c.insole_rate_hz);
        if (j.contains("wrist_above_load_cm"))
            c.wrist_above_load_cm = j.at("wrist_above_load_cm").get<std::map<std::string, double>>();
        if (j.contains("gait")) {
            const auto& g = j.at("gait");
            if (g.contains("slow")) read_shape(g.at("slow"), c.slow);
            if (g.contains("normal")) read_shape(g.at("normal"), c.normal);
            if (g.contains("fast")) read_shape(g.at("fast"), c.fast);
        }
        if (j.contains("drift")) {
            const auto& d = j.at("drift");
            c.drift.linear_pa_per_s = d.value("linear_pa_per_s", 0.0);
            c.drift.sin_amplitude_pa = d.value("sin_amplitude_pa", 0.0);
            c.drift.sin_period_s = d.value("sin_period_s", 60.0);
            c.drift.sin_phase_rad = d.value("sin_phase_rad", 0.0);
            c.drift.random_walk_pa_per_sqrt_s = d.value("random_walk_pa_per_sqrt_s", 0.0);
        }
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            c.noise.pressure_pa = n.value("pressure_pa", 0.0);
            c.noise.pitch_deg = n.value("pitch_deg", 0.0);
            c.noise.grf_n = n.value("grf_n", 0.0);
        }
        if (j.contains("script")) {
            for (const auto& a : j.at("script")) {
                const std::string kind = a.at("kind").get<std::string>();
                if (kind == "stand") {
                    c.script.push_back(Stand{a.at("duration_s").get<double>()});
                } else if (kind == "walk") {
                    const auto sp = parse_speed(a.value("speed", std::string("normal")));
                    if (!sp)
                        throw Error(Errc::InvalidConfig, "sim::config_from_json",
                                    "unknown speed " + a.value("speed", std::string()));
                    c.script.push_back(Walk{a.at("duration_s").get<double>(), *sp});
                } else if (kind == "lift") {
                    LiftSet l;
                    l.level = a.at("level").get<std::string>();
                    if (a.contains("level_cm"))
                        l.level_cm = a.at("level_cm").get<double>();
                    else
                        l.level_cm = a.at("level_in").get<double>() * kInchToCm;
                    l.repetitions = a.value("repetitions", 1);
                    l.hold_s = a.value("hold_s", 3.0);
                    l.stand_s = a.value("stand_s", 5.0);
                    c.script.push_back(l);
                } else {
                    throw Error(Errc::InvalidConfig, "sim::config_from_json",
                                "unknown activity kind " + kind);
                }
            }
        } else {
            c.script = default_protocol(c.seed).script;
        }
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, "sim::config_from_json", e.what());
    }
    c.validate();
    return c;
}

std::string config_to_json(const SimConfig& c)
{
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["subject_id"] = c.subject_id;
    j["body_height_cm"] = c.body_height_cm;
    j["wrist_ratio"] = c.wrist_ratio;
    j["body_mass_kg"] = c.body_mass_kg;
    j["stance_fraction"] = c.stance_fraction;
    j["arm_length_cm"] = c.arm_length_cm;
    j["lift_pitch_deg"] = c.lift_pitch_deg;
    j["lift_transition_s"] = c.lift_transition_s;
    j["p0_pa"] = c.p0_pa;
    j["a_true_cm_per_pa"] = c.a_true();
    j["wrist_rate_hz"] = c.wrist_rate_hz;
    j["insole_rate_hz"] = c.insole_rate_hz;
    j["wrist_above_load_cm"] = c.wrist_above_load_cm;
    j["gait"] = {{"slow", shape_json(c.slow)}, {"normal", shape_json(c.normal)},
                 {"fast", shape_json(c.fast)}};
    j["drift"] = {{"linear_pa_per_s", c.drift.linear_pa_per_s},
                  {"sin_amplitude_pa", c.drift.sin_amplitude_pa},
                  {"sin_period_s", c.drift.sin_period_s},
                  {"sin_phase_rad", c.drift.sin_phase_rad},
                  {"random_walk_pa_per_sqrt_s", c.drift.random_walk_pa_per_sqrt_s}};
    j["noise"] = {{"pressure_pa", c.noise.pressure_pa},
                  {"pitch_deg", c.noise.pitch_deg},
                  {"grf_n", c.noise.grf_n}};
    auto script = nlohmann::ordered_json::array();
    for (const auto& a : c.script) {
        if (const auto* s = std::get_if<Stand>(&a)) {
            script.push_back({{"kind", "stand"}, {"duration_s", s->duration_s}});
        } else if (const auto* w = std::get_if<Walk>(&a)) {
            script.push_back({{"kind", "walk"},
                              {"duration_s", w->duration_s},
                              {"speed", std::string(to_string(w->speed))}});
        } else {
            const auto& l = std::get<LiftSet>(a);
            script.push_back({{"kind", "lift"},
                              {"level", l.level},
                              {"level_cm", l.level_cm},
                              {"repetitions", l.repetitions},
                              {"hold_s", l.hold_s},
                              {"stand_s", l.stand_s}});
        }
    }
    j["script"] = script;
    return j.dump(2);
}

}  // namespace kvlu::sim
