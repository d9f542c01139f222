#include "kvlu/gait.hpp"

#include "kvlu/error.hpp"
#include "kvlu/stats.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace kvlu::gait {

namespace {

// Duration comparisons tolerate accumulated timestamp rounding.
constexpr double kTimeEps = 1e-9;

double series_end(std::span<const double> t, double max_gap_s)
{
    if (t.empty())
        return 0.0;
    double dt = median_interval(t);
    if (!(dt > 0.0) || dt > max_gap_s)
        dt = 0.0;
    return t.back() + dt;
}

}  // namespace

void GaitConfig::validate() const
{
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!(swing_fraction > 0.0 && swing_fraction < 1.0) || !positive(peak_window_s) ||
        min_swing_s < 0.0 || min_foot_flat_s < 0.0 || standing_load_min_n < 0.0 ||
        standing_min_s < 0.0 || !positive(cycle_min_s) || !(cycle_max_s > cycle_min_s) ||
        !positive(max_gap_s))
        throw Error(Errc::InvalidConfig, "gait::GaitConfig", "invalid gait parameters");
}

GrfSeries grf_series(const InsoleStream& stream)
{
    GrfSeries g;
    g.side = stream.side;
    const auto n = stream.samples.size();
    g.t.reserve(n);
    g.heel.reserve(n);
    g.midfoot.reserve(n);
    g.forefoot.reserve(n);
    g.total.reserve(n);
    for (const auto& s : stream.samples) {
        const double h = region_grf(s, Region::Heel, stream.regions);
        const double m = region_grf(s, Region::Midfoot, stream.regions);
        const double f = region_grf(s, Region::Forefoot, stream.regions);
        g.t.push_back(s.t);
        g.heel.push_back(h);
        g.midfoot.push_back(m);
        g.forefoot.push_back(f);
        g.total.push_back(h + m + f);
    }
    return g;
}

std::vector<IntervalLabel> runs_to_intervals(std::span<const double> t,
                                             const std::vector<bool>& mask, double min_duration,
                                             IntervalSide side, PhaseLabel label,
                                             double max_gap_s)
{
    std::vector<IntervalLabel> out;
    const std::size_t n = t.size();
    double nominal = median_interval(t);
    if (!(nominal > 0.0) || nominal > max_gap_s)
        nominal = 0.0;
    std::size_t i = 0;
    while (i < n) {
        if (!mask[i]) {
            ++i;
            continue;
        }
        const std::size_t first = i;
        double end = 0.0;
        while (true) {
            const bool has_next = i + 1 < n && t[i + 1] - t[i] <= max_gap_s;
            if (has_next && mask[i + 1]) {
                ++i;
                continue;
            }
            end = has_next ? t[i + 1] : t[i] + nominal;
            break;
        }
        if (end > t[first] && end - t[first] >= min_duration - kTimeEps)
            out.push_back({t[first], end, side, label});
        ++i;
    }
    return out;
}

SwingDetection detect_swing(const GrfSeries& grf, const GaitConfig& cfg)
{
    cfg.validate();
    SwingDetection result;
    const std::size_t n = grf.size();
    if (n < 2 || grf.t.back() - grf.t.front() < cfg.min_stream_s - kTimeEps)
        throw Error(Errc::StreamTooShort, "gait::detect_swing",
                    "stream spans less than " + std::to_string(cfg.min_stream_s) + " s");

    const double global_peak = *std::max_element(grf.total.begin(), grf.total.end());
    if (!(global_peak > 0.0)) {
        result.warnings.push_back(std::string(to_string(grf.side)) +
                                  " insole: zero total GRF, swing threshold undefined");
        return result;
    }

    // Centered rolling maximum over [t - w/2, t + w/2] with a monotonic deque.
    const double half = 0.5 * cfg.peak_window_s;
    std::vector<double> peak(n, 0.0);
    std::deque<std::size_t> dq;
    std::size_t hi = 0;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (hi < n && grf.t[hi] <= grf.t[i] + half) {
            while (!dq.empty() && grf.total[dq.back()] <= grf.total[hi])
                dq.pop_back();
            dq.push_back(hi);
            ++hi;
        }
        while (lo < n && grf.t[lo] < grf.t[i] - half)
            ++lo;
        while (!dq.empty() && dq.front() < lo)
            dq.pop_front();
        peak[i] = grf.total[dq.front()];
    }

    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i)
        mask[i] = peak[i] > 0.0 && grf.total[i] < cfg.swing_fraction * peak[i];
    result.intervals = runs_to_intervals(grf.t, mask, cfg.min_swing_s, to_interval_side(grf.side),
                                         PhaseLabel::Swing, cfg.max_gap_s);
    return result;
}

SwingDetection detect_swing(const InsoleStream& stream, const GaitConfig& cfg)
{
    return detect_swing(grf_series(stream), cfg);
}

RegionThresholds region_thresholds(const GrfSeries& grf, std::span<const IntervalLabel> swings,
                                   const GaitConfig& cfg)
{
    std::vector<double> heel;
    std::vector<double> fore;
    std::size_t k = 0;
    for (std::size_t i = 0; i < grf.size(); ++i) {
        const double t = grf.t[i];
        while (k < swings.size() && swings[k].end <= t)
            ++k;
        if (k < swings.size() && swings[k].contains(t)) {
            heel.push_back(grf.heel[i]);
            fore.push_back(grf.forefoot[i]);
        }
    }
    if (heel.size() < cfg.min_swing_samples)
        throw Error(Errc::InsufficientSwingSamples, "gait::region_thresholds",
                    std::to_string(heel.size()) + " swing samples, need " +
                        std::to_string(cfg.min_swing_samples));
    const auto h = stats::population_moments(heel);
    const auto f = stats::population_moments(fore);
    RegionThresholds thr;
    thr.heel_mean = h.mean;
    thr.heel_sigma = h.stddev;
    thr.forefoot_mean = f.mean;
    thr.forefoot_sigma = f.stddev;
    thr.heel = h.mean + 3.0 * h.stddev;
    thr.forefoot = f.mean + 3.0 * f.stddev;
    thr.n_swing = heel.size();
    thr.computed_from = spans_of(swings);
    return thr;
}

RegionThresholds region_thresholds(const InsoleStream& stream,
                                   std::span<const IntervalLabel> swings, const GaitConfig& cfg)
{
    return region_thresholds(grf_series(stream), swings, cfg);
}

std::vector<IntervalLabel> detect_foot_flat(const GrfSeries& grf, const RegionThresholds& thr,
                                            const GaitConfig& cfg)
{
    std::vector<bool> mask(grf.size());
    for (std::size_t i = 0; i < grf.size(); ++i)
        mask[i] = grf.heel[i] > thr.heel && grf.forefoot[i] > thr.forefoot;
    return runs_to_intervals(grf.t, mask, cfg.min_foot_flat_s, to_interval_side(grf.side),
                             PhaseLabel::FootFlat, cfg.max_gap_s);
}

std::vector<IntervalLabel> detect_foot_flat(const InsoleStream& stream,
                                            const RegionThresholds& thr, const GaitConfig& cfg)
{
    return detect_foot_flat(grf_series(stream), thr, cfg);
}

// ---------------------------------------------------------------------------
// Activity classification

namespace {

std::vector<TimeSpan> walking_spans(std::span<const IntervalLabel> left_swings,
                                    std::span<const IntervalLabel> right_swings,
                                    const GaitConfig& cfg)
{
    std::vector<IntervalLabel> all(left_swings.begin(), left_swings.end());
    all.insert(all.end(), right_swings.begin(), right_swings.end());
    std::sort(all.begin(), all.end(), [](const IntervalLabel& a, const IntervalLabel& b) {
        return a.start < b.start || (a.start == b.start && a.side < b.side);
    });

    std::vector<TimeSpan> out;
    std::vector<const IntervalLabel*> run;
    bool has_period = false;
    auto finish = [&] {
        if (run.size() >= 3 && has_period)
            out.push_back({run.front()->start, run.back()->end});
        run.clear();
        has_period = false;
    };
    for (const auto& s : all) {
        bool extends = false;
        if (!run.empty()) {
            const auto* prev = run.back();
            extends = s.side != prev->side && s.start - prev->end <= cfg.cycle_max_s;
            if (extends && run.size() >= 2) {
                const auto* same = run[run.size() - 2];
                const double period = s.start - same->start;
                extends = period >= cfg.cycle_min_s - kTimeEps &&
                          period <= cfg.cycle_max_s + kTimeEps;
                has_period = has_period || extends;
            }
        }
        if (!extends)
            finish();
        run.push_back(&s);
    }
    finish();
    return normalize(std::move(out));
}

}  // namespace

std::vector<IntervalLabel> classify_activity(const GrfSeries& left, const GrfSeries& right,
                                             std::span<const IntervalLabel> left_swings,
                                             std::span<const IntervalLabel> right_swings,
                                             const GaitConfig& cfg)
{
    cfg.validate();
    std::vector<IntervalLabel> out;
    if (left.size() == 0 && right.size() == 0)
        return out;
    double start = std::numeric_limits<double>::infinity();
    double end = -std::numeric_limits<double>::infinity();
    for (const auto* g : {&left, &right}) {
        if (g->size() == 0)
            continue;
        start = std::min(start, g->t.front());
        end = std::max(end, series_end(g->t, cfg.max_gap_s));
    }
    const std::vector<TimeSpan> session{{start, end}};

    const auto walking = walking_spans(left_swings, right_swings, cfg);

    // Both feet loaded, on the left timeline with the nearest right sample.
    std::vector<TimeSpan> standing;
    if (left.size() > 0 && right.size() > 0) {
        const double tol = std::max(median_interval(right.t), median_interval(left.t));
        std::vector<bool> mask(left.size(), false);
        std::size_t j = 0;
        for (std::size_t i = 0; i < left.size(); ++i) {
            const double t = left.t[i];
            while (j + 1 < right.size() && right.t[j + 1] <= t)
                ++j;
            std::size_t best = j;
            if (j + 1 < right.size() && std::abs(right.t[j + 1] - t) < std::abs(right.t[j] - t))
                best = j + 1;
            const bool near = std::abs(right.t[best] - t) <= tol;
            mask[i] = near && left.total[i] > cfg.standing_load_min_n &&
                      right.total[best] > cfg.standing_load_min_n;
        }
        auto loaded = spans_of(runs_to_intervals(left.t, mask, 0.0, IntervalSide::Both,
                                                 PhaseLabel::Standing, cfg.max_gap_s));
        std::vector<TimeSpan> swings = spans_of(left_swings);
        const auto rs = spans_of(right_swings);
        swings.insert(swings.end(), rs.begin(), rs.end());
        swings = normalize(std::move(swings));
        auto candidate = subtract(subtract(loaded, walking), swings);
        for (const auto& s : candidate) {
            if (s.duration() >= cfg.standing_min_s - kTimeEps)
                standing.push_back(s);
        }
    }

    const auto walking_in = intersect(walking, session);
    const auto standing_in = intersect(standing, session);
    std::vector<TimeSpan> labelled = walking_in;
    labelled.insert(labelled.end(), standing_in.begin(), standing_in.end());
    const auto unknown = subtract(session, normalize(labelled));

    for (const auto& s : walking_in)
        out.push_back({s.start, s.end, IntervalSide::Both, PhaseLabel::Walking});
    for (const auto& s : standing_in)
        out.push_back({s.start, s.end, IntervalSide::Both, PhaseLabel::Standing});
    for (const auto& s : unknown)
        out.push_back({s.start, s.end, IntervalSide::Both, PhaseLabel::Unknown});
    std::sort(out.begin(), out.end(),
              [](const IntervalLabel& a, const IntervalLabel& b) { return a.start < b.start; });
    return out;
}

std::vector<IntervalLabel> classify_activity(const InsoleStream& left, const InsoleStream& right,
                                             const GaitConfig& cfg)
{
    const auto lg = grf_series(left);
    const auto rg = grf_series(right);
    auto swings_of = [&](const GrfSeries& g) {
        try {
            return detect_swing(g, cfg).intervals;
        } catch (const Error& e) {
            if (e.code() != Errc::StreamTooShort)
                throw;
            return std::vector<IntervalLabel>{};
        }
    };
    return classify_activity(lg, rg, swings_of(lg), swings_of(rg), cfg);
}

// ---------------------------------------------------------------------------

std::vector<GaitCycle> segment_cycles(Side side, std::span<const IntervalLabel> swings,
                                      std::span<const IntervalLabel> foot_flats,
                                      std::span<const IntervalLabel> activities)
{
    std::vector<GaitCycle> out;
    const auto walking = spans_of(activities, PhaseLabel::Walking);
    auto walking_index = [&](const IntervalLabel& s) -> std::optional<std::size_t> {
        for (std::size_t w = 0; w < walking.size(); ++w) {
            if (s.start >= walking[w].start - kTimeEps && s.end <= walking[w].end + kTimeEps)
                return w;
        }
        return std::nullopt;
    };
    for (std::size_t i = 0; i + 1 < swings.size(); ++i) {
        const auto& a = swings[i];
        const auto& b = swings[i + 1];
        const auto wa = walking_index(a);
        const auto wb = walking_index(b);
        if (!wa || !wb || *wa != *wb)
            continue;
        GaitCycle c;
        c.side = side;
        c.start = a.end;
        c.end = b.end;
        c.swing = b;
        // Longest foot-flat piece inside this cycle's stance.
        const TimeSpan stance{a.end, b.start};
        double best = 0.0;
        for (const auto& ff : foot_flats) {
            const double lo = std::max(ff.start, stance.start);
            const double hi = std::min(ff.end, stance.end);
            if (hi - lo > best) {
                best = hi - lo;
                c.foot_flat = IntervalLabel{lo, hi, to_interval_side(side), PhaseLabel::FootFlat};
            }
        }
        out.push_back(c);
    }
    return out;
}

FootAnalysis analyze_foot(const InsoleStream& stream, const GaitConfig& cfg)
{
    FootAnalysis fa;
    fa.side = stream.side;
    fa.grf = grf_series(stream);
    try {
        auto sw = detect_swing(fa.grf, cfg);
        fa.swings = std::move(sw.intervals);
        fa.warnings = std::move(sw.warnings);
    } catch (const Error& e) {
        if (e.code() != Errc::StreamTooShort)
            throw;
        fa.warnings.emplace_back(e.what());
        return fa;
    }
    try {
        fa.thresholds = region_thresholds(fa.grf, fa.swings, cfg);
    } catch (const Error& e) {
        if (e.code() != Errc::InsufficientSwingSamples)
            throw;
        fa.warnings.emplace_back(e.what());
        return fa;
    }
    fa.foot_flats = detect_foot_flat(fa.grf, *fa.thresholds, cfg);
    return fa;
}

}  // namespace kvlu::gait
