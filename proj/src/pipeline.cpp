#include "kvlu/pipeline.hpp"

#include "kvlu/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kvlu::pipeline {

void PipelineConfig::validate() const
{
    if (smooth_window == 0 || smooth_window % 2 == 0)
        throw Error(Errc::EvenWindow, "pipeline::PipelineConfig",
                    "smooth_window must be odd and positive");
    if (!(max_gap_s > 0))
        throw Error(Errc::InvalidConfig, "pipeline::PipelineConfig", "max_gap_s must be > 0");
    if (wrist_ratio && !(*wrist_ratio > 0 && *wrist_ratio < 1))
        throw Error(Errc::InvalidConfig, "pipeline::PipelineConfig", "wrist_ratio must be in (0, 1)");
    model.validate();
    lvl.validate();
    gait.validate();
}

nlohmann::ordered_json PipelineConfig::provenance() const
{
    nlohmann::ordered_json j;
    j["wrist_ratio"] = wrist_ratio ? nlohmann::ordered_json(*wrist_ratio)
                                   : nlohmann::ordered_json("manifest or 0.495");
    j["default_wrist_ratio"] = kDefaultWristRatio;
    j["angle_threshold_deg"] = angle_threshold_deg
                                   ? nlohmann::ordered_json(*angle_threshold_deg)
                                   : nlohmann::ordered_json("manifest, calibration or cohort");
    j["cohort_angle_threshold_deg"] = anchor::kCohortAngleThresholdDeg;
    j["min_angle_samples"] = anchor::kMinAngleSamples;
    j["smooth_window"] = smooth_window;
    j["max_gap_s"] = max_gap_s;
    j["model_a_cm_per_pa"] = model.a_cm_per_pa;
    j["model_b_cm"] = model.b_cm;
    j["max_anchor_jump_cm"] = lvl.max_anchor_jump_cm;
    j["drift_allowance_cm_per_s"] = lvl.drift_allowance_cm_per_s;
    j["anchor_gate_enabled"] = lvl.gate_enabled;
    j["gait"] = {{"swing_fraction", gait.swing_fraction},
                 {"peak_window_s", gait.peak_window_s},
                 {"min_swing_s", gait.min_swing_s},
                 {"min_foot_flat_s", gait.min_foot_flat_s},
                 {"min_stream_s", gait.min_stream_s},
                 {"min_swing_samples", gait.min_swing_samples},
                 {"standing_load_min_n", gait.standing_load_min_n},
                 {"standing_min_s", gait.standing_min_s},
                 {"cycle_min_s", gait.cycle_min_s},
                 {"cycle_max_s", gait.cycle_max_s},
                 {"max_gap_s", gait.max_gap_s}};
    j["rnle_cm_per_pct"] = 3.3;
    return j;
}

namespace {

anchor::AngleThreshold pick_threshold(const Session& s, const ingest::SessionManifest& m,
                                      const PipelineConfig& cfg, std::string& source)
{
    if (cfg.angle_threshold_deg) {
        source = "override";
        return {*cfg.angle_threshold_deg, *cfg.angle_threshold_deg, 0.0, 0};
    }
    if (m.angle_threshold_deg) {
        source = "manifest";
        return {*m.angle_threshold_deg, *m.angle_threshold_deg, 0.0, 0};
    }
    if (m.angle_calibration) {
        std::vector<double> angles;
        for (const auto& w : s.wrist)
            for (const auto& x : w.samples)
                if (m.angle_calibration->contains(x.t))
                    angles.push_back(x.pitch_deg);
        source = "calibration";
        return anchor::compute_angle_threshold(angles);
    }
    source = "cohort";
    return anchor::AngleThreshold::cohort_default();
}

}  // namespace

SessionResult run_session(const Session& session, const ingest::SessionManifest& manifest,
                          const PipelineConfig& cfg)
{
    cfg.validate();
    SessionResult r;
    r.subject_id = manifest.subject_id;
    r.anthro = session.anthro;
    if (cfg.wrist_ratio)
        r.anthro.wrist_ratio = *cfg.wrist_ratio;
    r.anthro.validate();
    r.warnings = session.warnings;
    r.threshold = pick_threshold(session, manifest, cfg, r.threshold_source);

    r.left = gait::analyze_foot(session.left, cfg.gait);
    r.right = gait::analyze_foot(session.right, cfg.gait);
    for (const auto* f : {&r.left, &r.right})
        for (const auto& w : f->warnings)
            r.warnings.push_back(std::string("insole_") + std::string(side_code(f->side)) + ": " + w);
    r.activities =
        gait::classify_activity(r.left.grf, r.right.grf, r.left.swings, r.right.swings, cfg.gait);
    for (const auto* f : {&r.left, &r.right}) {
        auto c = gait::segment_cycles(f->side, f->swings, f->foot_flats, r.activities);
        r.cycles.insert(r.cycles.end(), c.begin(), c.end());
    }
    std::stable_sort(r.cycles.begin(), r.cycles.end(),
                     [](const gait::GaitCycle& a, const gait::GaitCycle& b) {
                         return a.start < b.start;
                     });

    std::vector<IntervalLabel> standing;
    for (const auto& a : r.activities)
        if (a.label == PhaseLabel::Standing)
            standing.push_back(a);

    for (const auto& w : session.wrist) {
        WristResult wr;
        wr.side = w.side;
        wr.smoothed = ingest::smooth_pressure(w, cfg.smooth_window, cfg.max_gap_s);
        auto st = anchor::detect_kvlu_standing(standing, wr.smoothed, r.threshold, r.anthro);
        auto wk = anchor::detect_kvlu_walking(r.cycles, wr.smoothed, r.threshold, r.anthro);
        r.points.insert(r.points.end(), st.begin(), st.end());
        r.points.insert(r.points.end(), wk.begin(), wk.end());
        r.wrists.push_back(std::move(wr));
    }
    std::stable_sort(r.points.begin(), r.points.end(),
                     [](const KvluPoint& a, const KvluPoint& b) { return a.t < b.t; });

    for (auto& wr : r.wrists) {
        const std::string tag = std::string("wrist_") + std::string(side_code(wr.side)) + ": ";
        try {
            wr.realtime = lvl::estimate_lvl_realtime(wr.smoothed, r.points, cfg.model, cfg.lvl);
            wr.raw = lvl::estimate_lvl_raw(wr.smoothed, r.points, cfg.model);
        } catch (const Error& e) {
            if (e.code() != Errc::NoAnchor)
                throw;
            r.warnings.push_back(tag + e.what());
            continue;
        }
        try {
            wr.corrected = lvl::correct_drift_retrospective(*wr.realtime, cfg.model);
        } catch (const Error& e) {
            if (e.code() != Errc::FewerThanTwoAnchors)
                throw;
            r.warnings.push_back(tag + e.what());
        }
        if (!wr.realtime->rejected.empty())
            r.warnings.push_back(tag + std::to_string(wr.realtime->rejected.size()) +
                                 " anchor(s) skipped by the jump gate");
    }
    return r;
}

std::string speed_class(double d)
{
    if (d >= 1.35)
        return "slow";
    if (d < 0.975)
        return "fast";
    return "normal";
}

namespace {

std::string level_label(double load_cm, const std::map<std::string, double>& levels)
{
    const std::pair<const std::string, double>* best = nullptr;
    for (const auto& kv : levels)
        if (!best || std::abs(kv.second - load_cm) < std::abs(best->second - load_cm))
            best = &kv;
    if (best && std::abs(best->second - load_cm) <= 1.0)
        return best->first;
    return "load_" + ingest::format_number(std::round(load_cm * 10.0) / 10.0) + "cm";
}

// Index of the truth sample matching each trace sample, if any.
std::vector<std::optional<std::size_t>> match_truth(const LvlTrace& trace,
                                                    std::span<const ingest::TruthSample> truth,
                                                    double tolerance)
{
    std::vector<double> tt;
    tt.reserve(truth.size());
    for (const auto& s : truth)
        tt.push_back(s.t);
    std::vector<double> ts;
    ts.reserve(trace.samples.size());
    for (const auto& s : trace.samples)
        ts.push_back(s.t);
    return ingest::nearest_indices(tt, ts, tolerance);
}

eval::ModeErrors mode_errors(const LvlTrace& trace, std::span<const ingest::TruthSample> truth,
                             const std::map<std::string, double>& levels, double tolerance)
{
    eval::ModeErrors m;
    if (truth.empty())
        return m;
    const auto proxy = lvl::wrist_height_as_lvl(trace);
    const auto idx = match_truth(proxy, truth, tolerance);
    eval::Accum wrist;
    for (std::size_t i = 0; i < proxy.samples.size(); ++i) {
        if (!idx[i])
            continue;
        const auto& tr = truth[*idx[i]];
        const double v = proxy.samples[i].lvl_cm;
        wrist.add(v - tr.wrist_height_cm);
        if (tr.load_height_cm) {
            const double e = v - *tr.load_height_cm;
            m.levels[level_label(*tr.load_height_cm, levels)].add(e);
            if (!m.lvl)
                m.lvl = eval::Accum{};
            m.lvl->add(e);
        }
    }
    if (wrist.n)
        m.wrist = wrist;
    return m;
}

}  // namespace

eval::SessionReport evaluate_session(const SessionResult& r,
                                     std::span<const ingest::TruthSample> truth,
                                     const std::map<std::string, double>& levels)
{
    eval::SessionReport s;
    s.subject_id = r.subject_id;
    s.body_height_cm = r.anthro.body_height_cm;
    s.wrist_ratio = r.anthro.wrist_ratio;
    s.estimated_wrist_height_cm = anchor::estimate_wrist_height(r.anthro);
    s.angle_threshold_deg = r.threshold.value;
    s.angle_threshold_source = r.threshold_source;
    s.kvlu_points = r.points.size();
    s.warnings = r.warnings;
    for (const auto& c : r.cycles)
        ++(c.side == Side::Left ? s.cycles_left : s.cycles_right);

    if (!truth.empty()) {
        std::vector<double> tt;
        for (const auto& x : truth)
            tt.push_back(x.t);
        std::vector<double> at;
        for (const auto& p : r.points)
            if (p.source == AnchorSource::Standing)
                at.push_back(p.t);
        const double tol = 0.5 * median_interval(tt);
        std::vector<double> heights;
        for (const auto& i : ingest::nearest_indices(tt, at, tol))
            if (i)
                heights.push_back(truth[*i].wrist_height_cm);
        if (!heights.empty()) {
            double sum = 0.0;
            for (double h : heights)
                sum += h;
            s.true_wrist_height_cm = sum / static_cast<double>(heights.size());
            s.accuracy_pct = eval::accuracy_pct(s.estimated_wrist_height_cm, *s.true_wrist_height_cm);
        }
    }

    // Detection rows for every (speed, foot, wrist) that has cycles.
    std::map<std::tuple<std::string, Side, Side>, eval::DetectionRow> rows;
    std::vector<Side> wrist_sides;
    for (const auto& w : r.wrists)
        wrist_sides.push_back(w.side);
    for (const auto& c : r.cycles) {
        const auto speed = speed_class(c.end - c.start);
        for (Side w : wrist_sides) {
            auto& row = rows[{speed, c.side, w}];
            row.speed = speed;
            row.foot = c.side;
            row.wrist = w;
            ++row.cycles;
            const bool hit = std::any_of(r.points.begin(), r.points.end(), [&](const KvluPoint& p) {
                return p.wrist_side == w && p.source == foot_source(c.side) && c.contains(p.t);
            });
            if (hit)
                ++row.covered;
        }
    }
    for (auto& [k, row] : rows)
        s.detection.push_back(row);

    for (const auto& w : r.wrists) {
        eval::WristReport wrep;
        wrep.side = w.side;
        if (w.realtime) {
            wrep.anchors = w.realtime->anchors.size();
            wrep.rejected = w.realtime->rejected.size();
            wrep.omitted_before_anchor = w.realtime->omitted_before_anchor;
        }
        std::vector<double> wt = times_of(w.smoothed);
        const double tol = 0.5 * median_interval(wt);
        auto add = [&](const char* name, const std::optional<LvlTrace>& t) {
            wrep.modes[name] = t ? mode_errors(*t, truth, levels, tol) : eval::ModeErrors{};
        };
        add("realtime", w.realtime);
        add("corrected", w.corrected);
        add("raw", w.raw);
        s.wrists.push_back(std::move(wrep));
    }
    return s;
}

void write_kvlu_points_csv(std::ostream& out, std::span<const KvluPoint> points)
{
    out << "t,wrist_side,source,anchor_pressure_pa,known_height_cm\n";
    for (const auto& p : points)
        out << ingest::format_number(p.t) << ',' << side_code(p.wrist_side) << ','
            << to_string(p.source) << ',' << ingest::format_number(p.anchor_pressure_pa) << ','
            << ingest::format_number(p.known_height_cm) << '\n';
}

void write_lvl_csv(std::ostream& out, const WristResult& w)
{
    out << "t,lvl_cm,anchor_t,mode\n";
    for (const auto* t : {&w.realtime, &w.corrected}) {
        if (!*t)
            continue;
        const auto& tr = **t;
        for (const auto& s : tr.samples) {
            out << ingest::format_number(s.t) << ',' << ingest::format_number(s.lvl_cm) << ',';
            if (s.anchor)
                out << ingest::format_number(tr.anchors[*s.anchor].t);
            out << ',' << to_string(tr.mode) << '\n';
        }
    }
}

void write_trace_compare_csv(std::ostream& out, const WristResult& w,
                             std::span<const ingest::TruthSample> truth)
{
    out << "t,raw_cm,realtime_cm,corrected_cm,truth_cm\n";
    if (!w.realtime)
        return;
    const auto& rt = *w.realtime;
    const std::vector<double> wt = times_of(w.smoothed);
    const auto idx = match_truth(rt, truth, 0.5 * median_interval(wt));
    for (std::size_t i = 0; i < rt.samples.size(); ++i) {
        out << ingest::format_number(rt.samples[i].t) << ',';
        // raw and corrected share the realtime sample grid: every trace
        // starts at the first accepted anchor.
        if (w.raw && i < w.raw->samples.size())
            out << ingest::format_number(w.raw->samples[i].lvl_cm);
        out << ',' << ingest::format_number(rt.samples[i].lvl_cm) << ',';
        if (w.corrected)
            out << ingest::format_number(w.corrected->samples[i].lvl_cm);
        out << ',';
        if (idx[i])
            out << ingest::format_number(truth[*idx[i]].wrist_height_cm);
        out << '\n';
    }
}

}  // namespace kvlu::pipeline
