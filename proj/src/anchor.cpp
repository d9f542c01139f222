#include "kvlu/anchor.hpp"

#include "kvlu/error.hpp"
#include "kvlu/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace kvlu::anchor {

AngleThreshold compute_angle_threshold(std::span<const double> angles_deg)
{
    if (angles_deg.size() < kMinAngleSamples)
        throw Error(Errc::TooFewSamples, "anchor::compute_angle_threshold",
                    std::to_string(angles_deg.size()) + " angle samples, need " +
                        std::to_string(kMinAngleSamples));
    const auto m = stats::population_moments(angles_deg);
    return {m.mean - 3.0 * m.stddev, m.mean, m.stddev, m.n};
}

double estimate_wrist_height(const Anthropometry& anthro)
{
    anthro.validate();
    return anthro.wrist_ratio * anthro.body_height_cm;
}

double refit_wrist_ratio(std::span<const std::pair<double, double>> wrist_body_pairs)
{
    if (wrist_body_pairs.empty())
        throw Error(Errc::TooFewSamples, "anchor::refit_wrist_ratio", "no calibration pairs");
    std::vector<double> ratios;
    for (auto [wrist, body] : wrist_body_pairs) {
        if (!(body > 0.0) || !(wrist > 0.0) || wrist >= body)
            throw Error(Errc::InvalidConfig, "anchor::refit_wrist_ratio",
                        "pairs need 0 < wrist height < body height");
        ratios.push_back(wrist / body);
    }
    return stats::mean(ratios);
}

namespace {

// Sample index nearest `target` within [first, last], earlier on ties.
std::size_t nearest_sample(const WristStream& w, std::size_t first, std::size_t last, double target)
{
    std::size_t best = first;
    for (std::size_t i = first; i <= last; ++i) {
        if (std::abs(w.samples[i].t - target) < std::abs(w.samples[best].t - target))
            best = i;
    }
    return best;
}

KvluPoint make_point(const WristSample& s, AnchorSource source, double height)
{
    return {s.t, s.side, source, s.pressure_pa, height};
}

}  // namespace

std::vector<KvluPoint> detect_kvlu_standing(std::span<const IntervalLabel> standing,
                                            const WristStream& wrist,
                                            const AngleThreshold& threshold,
                                            const Anthropometry& anthro)
{
    const double height = estimate_wrist_height(anthro);
    std::vector<KvluPoint> out;
    const auto& s = wrist.samples;
    for (const auto& interval : standing) {
        if (interval.label != PhaseLabel::Standing)
            continue;
        auto it = std::lower_bound(s.begin(), s.end(), interval.start,
                                   [](const WristSample& x, double t) { return x.t < t; });
        std::size_t i = static_cast<std::size_t>(it - s.begin());
        while (i < s.size() && interval.contains(s[i].t)) {
            if (!(s[i].pitch_deg > threshold.value)) {
                ++i;
                continue;
            }
            const std::size_t first = i;
            while (i + 1 < s.size() && interval.contains(s[i + 1].t) &&
                   s[i + 1].pitch_deg > threshold.value)
                ++i;
            const std::size_t last = i;
            const double mid = 0.5 * (s[first].t + s[last].t);
            out.push_back(
                make_point(s[nearest_sample(wrist, first, last, mid)], AnchorSource::Standing, height));
            ++i;
        }
    }
    return out;
}

std::vector<KvluPoint> detect_kvlu_walking(std::span<const gait::GaitCycle> cycles,
                                           const WristStream& wrist,
                                           const AngleThreshold& threshold,
                                           const Anthropometry& anthro)
{
    const double height = estimate_wrist_height(anthro);
    std::vector<KvluPoint> out;
    const auto& s = wrist.samples;
    for (const auto& c : cycles) {
        if (!c.foot_flat)
            continue;
        const auto& ff = *c.foot_flat;
        auto it = std::lower_bound(s.begin(), s.end(), ff.start,
                                   [](const WristSample& x, double t) { return x.t < t; });
        std::optional<std::size_t> first;
        std::optional<std::size_t> last;
        for (auto i = static_cast<std::size_t>(it - s.begin()); i < s.size() && s[i].t < ff.end;
             ++i) {
            if (s[i].pitch_deg > threshold.value) {
                if (!first)
                    first = i;
                last = i;
            }
        }
        if (!first)
            continue;
        const double mid = ff.midpoint();
        const std::size_t pick =
            std::abs(s[*first].t - mid) <= std::abs(s[*last].t - mid) ? *first : *last;
        out.push_back(make_point(s[pick], foot_source(c.side), height));
    }
    std::sort(out.begin(), out.end(),
              [](const KvluPoint& a, const KvluPoint& b) { return a.t < b.t; });
    return out;
}

std::string combination_name(Combination c)
{
    return std::string(c.foot == Side::Left ? "LF" : "RF") + "-" +
           (c.wrist == Side::Left ? "LW" : "RW");
}

std::map<Combination, double> kvlu_detection_rate(std::span<const gait::GaitCycle> cycles,
                                                  std::span<const KvluPoint> points)
{
    if (cycles.empty())
        throw Error(Errc::NoCycles, "anchor::kvlu_detection_rate", "no gait cycles");
    std::map<Combination, double> out;
    for (Side foot : {Side::Left, Side::Right}) {
        std::size_t total = 0;
        std::map<Side, std::set<std::size_t>> covered;
        for (std::size_t ci = 0; ci < cycles.size(); ++ci) {
            const auto& c = cycles[ci];
            if (c.side != foot)
                continue;
            ++total;
            for (const auto& p : points) {
                if (p.source == foot_source(foot) && c.contains(p.t))
                    covered[p.wrist_side].insert(ci);
            }
        }
        if (total == 0)
            continue;
        for (Side wrist : {Side::Left, Side::Right})
            out[{foot, wrist}] =
                100.0 * static_cast<double>(covered[wrist].size()) / static_cast<double>(total);
    }
    return out;
}

}  // namespace kvlu::anchor
