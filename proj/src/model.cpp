#include "kvlu/model.hpp"

#include "kvlu/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kvlu {

std::string_view to_string(Side s) { return s == Side::Left ? "Left" : "Right"; }

std::string_view side_code(Side s) { return s == Side::Left ? "L" : "R"; }

std::string_view to_string(IntervalSide s)
{
    switch (s) {
    case IntervalSide::Left: return "Left";
    case IntervalSide::Right: return "Right";
    case IntervalSide::Both: return "Both";
    }
    return "Both";
}

std::string_view to_string(PhaseLabel l)
{
    switch (l) {
    case PhaseLabel::Swing: return "Swing";
    case PhaseLabel::FootFlat: return "FootFlat";
    case PhaseLabel::StanceOther: return "StanceOther";
    case PhaseLabel::Standing: return "Standing";
    case PhaseLabel::Walking: return "Walking";
    case PhaseLabel::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string_view to_string(Region r)
{
    switch (r) {
    case Region::Heel: return "Heel";
    case Region::Midfoot: return "Midfoot";
    case Region::Forefoot: return "Forefoot";
    case Region::Total: return "Total";
    }
    return "Total";
}

std::string_view to_string(AnchorSource s)
{
    switch (s) {
    case AnchorSource::Standing: return "Standing";
    case AnchorSource::RF: return "RF";
    case AnchorSource::LF: return "LF";
    }
    return "Standing";
}

std::string_view to_string(TraceMode m)
{
    switch (m) {
    case TraceMode::Realtime: return "realtime";
    case TraceMode::Corrected: return "corrected";
    case TraceMode::Raw: return "raw";
    }
    return "realtime";
}

std::optional<Side> parse_side(std::string_view text)
{
    if (text == "L" || text == "Left")
        return Side::Left;
    if (text == "R" || text == "Right")
        return Side::Right;
    return std::nullopt;
}

std::optional<IntervalSide> parse_interval_side(std::string_view text)
{
    if (text == "Both" || text == "B")
        return IntervalSide::Both;
    if (auto s = parse_side(text))
        return to_interval_side(*s);
    return std::nullopt;
}

std::optional<PhaseLabel> parse_phase_label(std::string_view text)
{
    for (auto l : {PhaseLabel::Swing, PhaseLabel::FootFlat, PhaseLabel::StanceOther,
                   PhaseLabel::Standing, PhaseLabel::Walking, PhaseLabel::Unknown}) {
        if (to_string(l) == text)
            return l;
    }
    return std::nullopt;
}

std::optional<AnchorSource> parse_anchor_source(std::string_view text)
{
    for (auto s : {AnchorSource::Standing, AnchorSource::RF, AnchorSource::LF}) {
        if (to_string(s) == text)
            return s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Region map

RegionMap::RegionMap(const std::array<Region, kInsoleCells>& labels) : labels_(labels)
{
    for (Region r : labels_) {
        if (r == Region::Total)
            throw Error(Errc::InvalidConfig, "model::RegionMap", "cell labelled Total");
    }
}

RegionMap RegionMap::longitudinal(double forefoot_fraction, double heel_fraction)
{
    if (forefoot_fraction < 0 || heel_fraction < 0 || forefoot_fraction + heel_fraction > 1)
        throw Error(Errc::InvalidConfig, "model::RegionMap::longitudinal",
                    "region fractions must be non-negative and sum to at most 1");
    std::array<Region, kInsoleCells> labels{};
    for (std::size_t row = 0; row < kRows; ++row) {
        const double centre = (static_cast<double>(row) + 0.5) / static_cast<double>(kRows);
        Region r = Region::Midfoot;
        if (centre < forefoot_fraction)
            r = Region::Forefoot;
        else if (centre > 1.0 - heel_fraction)
            r = Region::Heel;
        for (std::size_t col = 0; col < kCols; ++col)
            labels[row * kCols + col] = r;
    }
    return RegionMap(labels);
}

RegionMap RegionMap::parse(std::string_view text)
{
    std::string buf(text);
    std::replace(buf.begin(), buf.end(), ',', ' ');
    std::istringstream in(buf);
    std::array<Region, kInsoleCells> labels{};
    std::size_t n = 0;
    std::string tok;
    while (in >> tok) {
        if (n == kInsoleCells)
            throw Error(Errc::InvalidConfig, "model::RegionMap::parse", "more than 96 labels");
        if (tok == "H")
            labels[n] = Region::Heel;
        else if (tok == "M")
            labels[n] = Region::Midfoot;
        else if (tok == "F")
            labels[n] = Region::Forefoot;
        else
            throw Error(Errc::InvalidConfig, "model::RegionMap::parse",
                        "unknown region label '" + tok + "'");
        ++n;
    }
    if (n != kInsoleCells)
        throw Error(Errc::InvalidConfig, "model::RegionMap::parse",
                    "expected 96 labels, got " + std::to_string(n));
    return RegionMap(labels);
}

std::size_t RegionMap::count(Region r) const
{
    if (r == Region::Total)
        return kInsoleCells;
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), r));
}

std::string RegionMap::serialize() const
{
    std::string out;
    for (std::size_t i = 0; i < kInsoleCells; ++i) {
        const Region r = labels_[i];
        out += r == Region::Heel ? 'H' : r == Region::Midfoot ? 'M' : 'F';
        out += (i + 1) % kCols == 0 ? '\n' : ' ';
    }
    return out;
}

const RegionMap& default_region_map()
{
    static const RegionMap map = RegionMap::longitudinal();
    return map;
}

double region_grf(const InsoleSample& sample, Region region, const RegionMap& regions)
{
    // Total is the sum of the three region sums so that the decomposition
    // holds bit-for-bit.
    if (region == Region::Total)
        return region_grf(sample, Region::Heel, regions) +
               region_grf(sample, Region::Midfoot, regions) +
               region_grf(sample, Region::Forefoot, regions);
    double sum = 0.0;
    for (std::size_t i = 0; i < kInsoleCells; ++i) {
        if (regions.at(i) == region)
            sum += sample.cells[i];
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Interval algebra

std::vector<TimeSpan> normalize(std::vector<TimeSpan> spans)
{
    std::erase_if(spans, [](const TimeSpan& s) { return !(s.end > s.start); });
    std::sort(spans.begin(), spans.end(),
              [](const TimeSpan& a, const TimeSpan& b) { return a.start < b.start; });
    std::vector<TimeSpan> out;
    for (const auto& s : spans) {
        if (!out.empty() && s.start <= out.back().end)
            out.back().end = std::max(out.back().end, s.end);
        else
            out.push_back(s);
    }
    return out;
}

std::vector<TimeSpan> intersect(std::span<const TimeSpan> a, std::span<const TimeSpan> b)
{
    std::vector<TimeSpan> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].start, b[j].start);
        const double hi = std::min(a[i].end, b[j].end);
        if (hi > lo)
            out.push_back({lo, hi});
        if (a[i].end < b[j].end)
            ++i;
        else
            ++j;
    }
    return out;
}

std::vector<TimeSpan> subtract(std::span<const TimeSpan> a, std::span<const TimeSpan> b)
{
    std::vector<TimeSpan> out;
    std::size_t j = 0;
    for (const auto& s : a) {
        double cur = s.start;
        while (j < b.size() && b[j].end <= cur)
            ++j;
        std::size_t k = j;
        while (k < b.size() && b[k].start < s.end) {
            if (b[k].start > cur)
                out.push_back({cur, b[k].start});
            cur = std::max(cur, b[k].end);
            ++k;
        }
        if (cur < s.end)
            out.push_back({cur, s.end});
    }
    return out;
}

double total_duration(std::span<const TimeSpan> spans)
{
    double d = 0.0;
    for (const auto& s : spans)
        d += s.duration();
    return d;
}

std::vector<TimeSpan> spans_of(std::span<const IntervalLabel> labels)
{
    std::vector<TimeSpan> out;
    out.reserve(labels.size());
    for (const auto& l : labels)
        out.push_back(l.span());
    return out;
}

std::vector<TimeSpan> spans_of(std::span<const IntervalLabel> labels, PhaseLabel which)
{
    std::vector<TimeSpan> out;
    for (const auto& l : labels) {
        if (l.label == which)
            out.push_back(l.span());
    }
    return out;
}

// ---------------------------------------------------------------------------

void Anthropometry::validate() const
{
    if (!(body_height_cm > 0.0) || !std::isfinite(body_height_cm))
        throw Error(Errc::InvalidConfig, "model::Anthropometry", "body_height must be > 0");
    if (!(wrist_ratio > 0.0 && wrist_ratio < 1.0))
        throw Error(Errc::InvalidConfig, "model::Anthropometry", "wrist_ratio must lie in (0, 1)");
}

PressureHeightModel PressureHeightModel::hydrostatic(double air_density_kg_m3, double gravity_m_s2)
{
    return {-100.0 / (air_density_kg_m3 * gravity_m_s2), 0.0};
}

void PressureHeightModel::validate() const
{
    if (!(a_cm_per_pa < 0.0) || !std::isfinite(a_cm_per_pa) || !std::isfinite(b_cm))
        throw Error(Errc::InvalidConfig, "model::PressureHeightModel",
                    "slope a must be finite and negative");
}

const WristStream* Session::wrist_stream(Side side) const
{
    for (const auto& w : wrist) {
        if (w.side == side)
            return &w;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Session validation

double median_interval(std::span<const double> times)
{
    std::vector<double> dts;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double dt = times[i] - times[i - 1];
        if (dt > 0)
            dts.push_back(dt);
    }
    if (dts.empty())
        return 0.0;
    auto mid = dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2);
    std::nth_element(dts.begin(), mid, dts.end());
    return *mid;
}

double estimate_rate_hz(std::span<const double> times)
{
    const double dt = median_interval(times);
    return dt > 0 ? 1.0 / dt : 0.0;
}

std::vector<double> times_of(const WristStream& s)
{
    std::vector<double> t;
    t.reserve(s.samples.size());
    for (const auto& x : s.samples)
        t.push_back(x.t);
    return t;
}

std::vector<double> times_of(const InsoleStream& s)
{
    std::vector<double> t;
    t.reserve(s.samples.size());
    for (const auto& x : s.samples)
        t.push_back(x.t);
    return t;
}

namespace {

constexpr const char* kValidate = "model::validate_session";

// Checks ordering, drops repeated timestamps (keeping the first) and returns
// the number dropped.
template <class Sample>
std::size_t check_time_order(std::vector<Sample>& samples, const std::string& name)
{
    if (samples.empty())
        throw Error(Errc::EmptyStream, kValidate, name + " has no samples");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].t) || samples[i].t < 0.0)
            bad.push_back(i);
        else if (i > 0 && samples[i].t < samples[i - 1].t)
            bad.push_back(i);
    }
    if (!bad.empty()) {
        std::string list;
        for (auto i : bad)
            list += (list.empty() ? "" : ",") + std::to_string(i);
        throw Error(Errc::NonMonotonicTime, kValidate, name + " at index " + list, bad);
    }
    const auto before = samples.size();
    auto last = std::unique(samples.begin(), samples.end(),
                            [](const Sample& a, const Sample& b) { return a.t == b.t; });
    samples.erase(last, samples.end());
    return before - samples.size();
}

template <class Stream>
StreamStats stats_for(const Stream& s, const std::string& name, std::size_t dropped)
{
    const auto t = times_of(s);
    return {name, s.samples.size(), dropped, estimate_rate_hz(t)};
}

}  // namespace

Session validate_session(std::vector<WristStream> wrist, std::optional<InsoleStream> left,
                         std::optional<InsoleStream> right, std::optional<Anthropometry> anthro)
{
    if (wrist.empty())
        throw Error(Errc::EmptyStream, kValidate, "no wrist stream");
    if (!left || !right)
        throw Error(Errc::EmptyStream, kValidate, "both insole streams are required");
    if (!anthro)
        throw Error(Errc::MissingAnthropometry, kValidate, "body height not provided");
    anthro->validate();

    Session session;
    session.anthro = *anthro;

    for (auto& w : wrist) {
        const std::string name = std::string("wrist_") + std::string(side_code(w.side));
        for (std::size_t i = 0; i < w.samples.size(); ++i) {
            const auto& s = w.samples[i];
            if (s.side != w.side)
                throw Error(Errc::OutOfRange, kValidate,
                            name + " sample " + std::to_string(i) + " has the wrong side");
            if (!(s.pressure_pa >= 30000.0 && s.pressure_pa <= 110000.0))
                throw Error(Errc::OutOfRange, kValidate,
                            name + " pressure outside [30000, 110000] Pa at index " +
                                std::to_string(i),
                            {i});
            if (!(s.pitch_deg >= -180.0 && s.pitch_deg <= 180.0))
                throw Error(Errc::OutOfRange, kValidate,
                            name + " pitch outside [-180, 180] deg at index " + std::to_string(i),
                            {i});
        }
        const auto dropped = check_time_order(w.samples, name);
        if (dropped > 0)
            session.warnings.push_back(name + ": dropped " + std::to_string(dropped) +
                                       " duplicate timestamp(s)");
        session.stats.push_back(stats_for(w, name, dropped));
    }
    std::sort(wrist.begin(), wrist.end(),
              [](const WristStream& a, const WristStream& b) { return a.side < b.side; });
    for (std::size_t i = 1; i < wrist.size(); ++i) {
        if (wrist[i].side == wrist[i - 1].side)
            throw Error(Errc::InvalidConfig, kValidate, "two wrist streams for the same side");
    }
    session.wrist = std::move(wrist);

    auto take_insole = [&](InsoleStream& s, Side expect, const char* name) {
        if (s.side != expect)
            throw Error(Errc::InvalidConfig, kValidate, std::string(name) + " has the wrong side");
        for (std::size_t i = 0; i < s.samples.size(); ++i) {
            for (double c : s.samples[i].cells) {
                if (!(c >= 0.0) || !std::isfinite(c))
                    throw Error(Errc::OutOfRange, kValidate,
                                std::string(name) + " negative or non-finite force at index " +
                                    std::to_string(i),
                                {i});
            }
        }
        const auto dropped = check_time_order(s.samples, name);
        if (dropped > 0)
            session.warnings.push_back(std::string(name) + ": dropped " + std::to_string(dropped) +
                                       " duplicate timestamp(s)");
        session.stats.push_back(stats_for(s, name, dropped));
    };
    take_insole(*left, Side::Left, "insole_L");
    take_insole(*right, Side::Right, "insole_R");
    session.left = std::move(*left);
    session.right = std::move(*right);

    // Stats for idempotency: report the deduplicated counts.
    std::sort(session.stats.begin(), session.stats.end(),
              [](const StreamStats& a, const StreamStats& b) { return a.name < b.name; });
    return session;
}

}  // namespace kvlu
