#include "kvlu/lvl.hpp"

#include "kvlu/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace kvlu::lvl {

PressureHeightModel fit_pressure_height_model(std::span<const std::pair<double, double>> pairs)
{
    constexpr const char* where = "lvl::fit_pressure_height_model";
    if (pairs.size() < 2)
        throw Error(Errc::DegeneratePairs, where, "need at least two pairs");
    const double n = static_cast<double>(pairs.size());
    double mx = 0.0;
    double my = 0.0;
    for (auto [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (auto [x, y] : pairs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0)
        throw Error(Errc::DegeneratePairs, where, "all pressure deltas are equal");
    PressureHeightModel m{sxy / sxx, 0.0};
    m.b_cm = my - m.a_cm_per_pa * mx;
    return m;
}

void LvlConfig::validate() const
{
    if (!(max_anchor_jump_cm > 0.0))
        throw Error(Errc::InvalidConfig, "lvl::LvlConfig", "max_anchor_jump_cm must be > 0");
    if (!(drift_allowance_cm_per_s >= 0.0))
        throw Error(Errc::InvalidConfig, "lvl::LvlConfig", "drift_allowance_cm_per_s must be >= 0");
}

namespace {

std::vector<KvluPoint> points_for(Side wrist, std::span<const KvluPoint> points)
{
    std::vector<KvluPoint> out;
    for (const auto& p : points)
        if (p.wrist_side == wrist)
            out.push_back(p);
    std::stable_sort(out.begin(), out.end(),
                     [](const KvluPoint& a, const KvluPoint& b) { return a.t < b.t; });
    return out;
}

// Height change the candidate would impose relative to `from`.
double implied_jump(const KvluPoint& from, const KvluPoint& candidate,
                    const PressureHeightModel& m)
{
    return m.a_cm_per_pa * (candidate.anchor_pressure_pa - from.anchor_pressure_pa) +
           from.known_height_cm - candidate.known_height_cm;
}

LvlTrace fold(const WristStream& wrist, const std::vector<KvluPoint>& candidates,
              const PressureHeightModel& model, const LvlConfig& cfg, TraceMode mode)
{
    LvlTrace trace;
    trace.wrist_side = wrist.side;
    trace.mode = mode;
    std::optional<KvluPoint> pending;
    std::size_t next = 0;

    auto consider = [&](const KvluPoint& c) {
        if (trace.anchors.empty()) {
            trace.anchors.push_back(c);
            return;
        }
        const KvluPoint& active = trace.anchors.back();
        if (c.t <= active.t)
            return;
        auto within = [&](const KvluPoint& from) {
            const double gate =
                cfg.max_anchor_jump_cm + cfg.drift_allowance_cm_per_s * (c.t - from.t);
            return std::abs(implied_jump(from, c, model)) <= gate;
        };
        const bool ok = !cfg.gate_enabled || within(active);
        const bool confirmed = pending && within(*pending);
        if (ok || confirmed) {
            trace.anchors.push_back(c);
            pending.reset();
        } else {
            trace.rejected.push_back(c);
            pending = c;
        }
    };

    trace.samples.reserve(wrist.samples.size());
    for (const auto& s : wrist.samples) {
        while (next < candidates.size() && candidates[next].t <= s.t)
            consider(candidates[next++]);
        if (trace.anchors.empty()) {
            ++trace.omitted_before_anchor;
            continue;
        }
        const KvluPoint& k = trace.anchors.back();
        trace.samples.push_back(
            {s.t,
             model.a_cm_per_pa * (s.pressure_pa - k.anchor_pressure_pa) + k.known_height_cm +
                 model.b_cm,
             trace.anchors.size() - 1});
    }
    return trace;
}

}  // namespace

LvlTrace estimate_lvl_realtime(const WristStream& wrist, std::span<const KvluPoint> points,
                               const PressureHeightModel& model, const LvlConfig& cfg)
{
    model.validate();
    cfg.validate();
    auto candidates = points_for(wrist.side, points);
    if (candidates.empty())
        throw Error(Errc::NoAnchor, "lvl::estimate_lvl_realtime",
                    std::string("no KVLU point for wrist ") + std::string(side_code(wrist.side)));
    return fold(wrist, candidates, model, cfg, TraceMode::Realtime);
}

LvlTrace estimate_lvl_raw(const WristStream& wrist, std::span<const KvluPoint> points,
                          const PressureHeightModel& model)
{
    model.validate();
    auto candidates = points_for(wrist.side, points);
    if (candidates.empty())
        throw Error(Errc::NoAnchor, "lvl::estimate_lvl_raw",
                    std::string("no KVLU point for wrist ") + std::string(side_code(wrist.side)));
    candidates.resize(1);
    return fold(wrist, candidates, model, {}, TraceMode::Raw);
}

LvlTrace correct_drift_retrospective(const LvlTrace& trace, const PressureHeightModel& model)
{
    if (trace.anchors.size() < 2)
        throw Error(Errc::FewerThanTwoAnchors, "lvl::correct_drift_retrospective",
                    std::to_string(trace.anchors.size()) + " accepted anchor(s)");
    // Residual at the later anchor of each segment, as seen from the earlier
    // one. b appears on both sides and cancels.
    std::vector<double> residual(trace.anchors.size() - 1);
    for (std::size_t k = 0; k + 1 < trace.anchors.size(); ++k)
        residual[k] = implied_jump(trace.anchors[k], trace.anchors[k + 1], model);

    LvlTrace out = trace;
    out.mode = TraceMode::Corrected;
    for (auto& s : out.samples) {
        if (!s.anchor || *s.anchor + 1 >= trace.anchors.size())
            continue;
        const double t0 = trace.anchors[*s.anchor].t;
        const double t1 = trace.anchors[*s.anchor + 1].t;
        s.lvl_cm -= residual[*s.anchor] * (s.t - t0) / (t1 - t0);
    }
    return out;
}

LvlTrace wrist_height_as_lvl(LvlTrace trace, const BiasHook& bias)
{
    trace.load_proxy = true;
    if (bias)
        for (auto& s : trace.samples)
            s.lvl_cm -= bias(s.t);
    return trace;
}

}  // namespace kvlu::lvl
