#include "kvlu/eval.hpp"

#include "kvlu/error.hpp"
#include "kvlu/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kvlu::eval {

using nlohmann::ordered_json;

namespace {

void check_pairs(std::span<const double> e, std::span<const double> t, const char* where)
{
    if (e.empty())
        throw Error(Errc::EmptyGroup, where, "no samples");
    if (e.size() != t.size())
        throw Error(Errc::EmptyGroup, where, "estimate/truth size mismatch");
}

}  // namespace

double mae(std::span<const double> estimates, std::span<const double> truth)
{
    check_pairs(estimates, truth, "eval::mae");
    Accum a;
    for (std::size_t i = 0; i < estimates.size(); ++i)
        a.add(estimates[i] - truth[i]);
    return a.mae();
}

MeanError mean_error(std::span<const double> estimates, std::span<const double> truth)
{
    check_pairs(estimates, truth, "eval::mean_error");
    // Two-pass for the spread; the running sums are only used for pooling.
    const double n = static_cast<double>(estimates.size());
    double s = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i)
        s += estimates[i] - truth[i];
    const double me = s / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double d = estimates[i] - truth[i] - me;
        ss += d * d;
    }
    return {me, std::sqrt(ss / n)};
}

void Accum::add(double e)
{
    ++n;
    sum_abs += std::abs(e);
    sum += e;
    sum_sq += e * e;
}

void Accum::merge(const Accum& o)
{
    n += o.n;
    sum_abs += o.sum_abs;
    sum += o.sum;
    sum_sq += o.sum_sq;
}

double Accum::mae() const { return n ? sum_abs / static_cast<double>(n) : 0.0; }
double Accum::me() const { return n ? sum / static_cast<double>(n) : 0.0; }
double Accum::me_std() const
{
    if (!n)
        return 0.0;
    const double m = me();
    return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n) - m * m));
}

Grouped grouped_errors(std::span<const double> estimates, std::span<const double> truth,
                       std::span<const std::string> groups)
{
    check_pairs(estimates, truth, "eval::grouped_errors");
    if (groups.size() != estimates.size())
        throw Error(Errc::EmptyGroup, "eval::grouped_errors", "group label size mismatch");
    Grouped g;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double e = estimates[i] - truth[i];
        g.groups[groups[i]].add(e);
        g.overall.add(e);
    }
    return g;
}

double accuracy_pct(double estimated_cm, double true_cm)
{
    if (!(true_cm > 0.0))
        throw Error(Errc::NonPositiveTruth, "eval::accuracy_pct", "true height must be > 0");
    return 100.0 * (1.0 - std::abs(estimated_cm - true_cm) / true_cm);
}

double rnle_sensitivity(double mae_cm)
{
    if (!(mae_cm >= 0.0))
        throw Error(Errc::OutOfRange, "eval::rnle_sensitivity", "MAE must be >= 0");
    return mae_cm / 3.3;
}

double DetectionRow::rate_pct() const
{
    return cycles ? 100.0 * static_cast<double>(covered) / static_cast<double>(cycles) : 0.0;
}

// ---------------------------------------------------------------------------

namespace {

void merge_mode(ModeErrors& into, const ModeErrors& m)
{
    if (m.wrist) {
        if (!into.wrist)
            into.wrist = Accum{};
        into.wrist->merge(*m.wrist);
    }
    for (const auto& [k, a] : m.levels)
        into.levels[k].merge(a);
    if (m.lvl) {
        if (!into.lvl)
            into.lvl = Accum{};
        into.lvl->merge(*m.lvl);
    }
}

}  // namespace

ErrorReport build_report(std::vector<SessionReport> sessions, ordered_json provenance)
{
    ErrorReport r;
    r.provenance = std::move(provenance);
    std::stable_sort(sessions.begin(), sessions.end(),
                     [](const SessionReport& a, const SessionReport& b) {
                         return a.subject_id < b.subject_id;
                     });
    std::map<std::tuple<std::string, Side, Side>, DetectionRow> det;
    std::map<std::string, std::pair<double, std::size_t>> session_mae;
    for (const auto& s : sessions) {
        for (const auto& d : s.detection) {
            auto& row = det[{d.speed, d.foot, d.wrist}];
            row.speed = d.speed;
            row.foot = d.foot;
            row.wrist = d.wrist;
            row.cycles += d.cycles;
            row.covered += d.covered;
        }
        std::map<std::string, ModeErrors> per_session;
        for (const auto& w : s.wrists)
            for (const auto& [mode, m] : w.modes) {
                merge_mode(r.pooled[mode], m);
                merge_mode(per_session[mode], m);
            }
        for (const auto& [mode, m] : per_session) {
            if (m.lvl && m.lvl->n) {
                session_mae[mode].first += m.lvl->mae();
                ++session_mae[mode].second;
            }
        }
    }
    for (const auto& [mode, acc] : session_mae)
        r.mean_session_lvl_mae[mode] = acc.first / static_cast<double>(acc.second);
    for (auto& [k, row] : det)
        r.detection.push_back(row);
    if (auto it = r.pooled.find("corrected"); it != r.pooled.end() && it->second.lvl)
        r.rnle_sensitivity_pct = rnle_sensitivity(it->second.lvl->mae());
    r.sessions = std::move(sessions);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

ordered_json accum_json(const Accum& a)
{
    ordered_json j;
    j["n"] = a.n;
    j["mae_cm"] = a.mae();
    j["me_cm"] = a.me();
    j["me_std_cm"] = a.me_std();
    j["sum_abs"] = a.sum_abs;
    j["sum"] = a.sum;
    j["sum_sq"] = a.sum_sq;
    return j;
}

Accum accum_from(const ordered_json& j)
{
    return {j.at("n").get<std::size_t>(), j.at("sum_abs").get<double>(), j.at("sum").get<double>(),
            j.at("sum_sq").get<double>()};
}

template <class T>
ordered_json opt_json(const std::optional<T>& v)
{
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <class T>
std::optional<T> opt_from(const ordered_json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<T>();
}

ordered_json mode_json(const ModeErrors& m)
{
    ordered_json j;
    j["wrist"] = m.wrist ? accum_json(*m.wrist) : ordered_json(nullptr);
    ordered_json levels = ordered_json::object();
    for (const auto& [k, a] : m.levels)
        levels[k] = accum_json(a);
    j["levels"] = levels;
    j["lvl"] = m.lvl ? accum_json(*m.lvl) : ordered_json(nullptr);
    return j;
}

ModeErrors mode_from(const ordered_json& j)
{
    ModeErrors m;
    if (!j.at("wrist").is_null())
        m.wrist = accum_from(j.at("wrist"));
    for (const auto& [k, v] : j.at("levels").items())
        m.levels[k] = accum_from(v);
    if (!j.at("lvl").is_null())
        m.lvl = accum_from(j.at("lvl"));
    return m;
}

ordered_json detection_json(const DetectionRow& d)
{
    ordered_json j;
    j["speed"] = d.speed;
    j["foot"] = std::string(side_code(d.foot));
    j["wrist"] = std::string(side_code(d.wrist));
    j["cycles"] = d.cycles;
    j["covered"] = d.covered;
    j["rate_pct"] = d.rate_pct();
    return j;
}

Side side_from(const ordered_json& j)
{
    auto s = parse_side(j.get<std::string>());
    if (!s)
        throw Error(Errc::InvalidConfig, "eval::report_from_json", "bad side");
    return *s;
}

DetectionRow detection_from(const ordered_json& j)
{
    return {j.at("speed").get<std::string>(), side_from(j.at("foot")), side_from(j.at("wrist")),
            j.at("cycles").get<std::size_t>(), j.at("covered").get<std::size_t>()};
}

}  // namespace

ordered_json to_json(const SessionReport& s)
{
    ordered_json j;
    j["subject_id"] = s.subject_id;
    j["body_height_cm"] = s.body_height_cm;
    j["wrist_ratio"] = s.wrist_ratio;
    j["estimated_wrist_height_cm"] = s.estimated_wrist_height_cm;
    j["true_wrist_height_cm"] = opt_json(s.true_wrist_height_cm);
    j["accuracy_pct"] = opt_json(s.accuracy_pct);
    j["angle_threshold_deg"] = s.angle_threshold_deg;
    j["angle_threshold_source"] = s.angle_threshold_source;
    j["cycles_left"] = s.cycles_left;
    j["cycles_right"] = s.cycles_right;
    j["kvlu_points"] = s.kvlu_points;
    auto det = ordered_json::array();
    for (const auto& d : s.detection)
        det.push_back(detection_json(d));
    j["detection"] = det;
    auto wrists = ordered_json::array();
    for (const auto& w : s.wrists) {
        ordered_json wj;
        wj["side"] = std::string(side_code(w.side));
        wj["anchors"] = w.anchors;
        wj["rejected"] = w.rejected;
        wj["omitted_before_anchor"] = w.omitted_before_anchor;
        ordered_json modes = ordered_json::object();
        for (const auto& [k, m] : w.modes)
            modes[k] = mode_json(m);
        wj["modes"] = modes;
        wrists.push_back(wj);
    }
    j["wrists"] = wrists;
    j["warnings"] = s.warnings;
    return j;
}

SessionReport session_from_json(const ordered_json& j)
{
    SessionReport s;
    s.subject_id = j.at("subject_id").get<std::string>();
    s.body_height_cm = j.at("body_height_cm").get<double>();
    s.wrist_ratio = j.at("wrist_ratio").get<double>();
    s.estimated_wrist_height_cm = j.at("estimated_wrist_height_cm").get<double>();
    s.true_wrist_height_cm = opt_from<double>(j, "true_wrist_height_cm");
    s.accuracy_pct = opt_from<double>(j, "accuracy_pct");
    s.angle_threshold_deg = j.at("angle_threshold_deg").get<double>();
    s.angle_threshold_source = j.at("angle_threshold_source").get<std::string>();
    s.cycles_left = j.at("cycles_left").get<std::size_t>();
    s.cycles_right = j.at("cycles_right").get<std::size_t>();
    s.kvlu_points = j.at("kvlu_points").get<std::size_t>();
    for (const auto& d : j.at("detection"))
        s.detection.push_back(detection_from(d));
    for (const auto& wj : j.at("wrists")) {
        WristReport w;
        w.side = side_from(wj.at("side"));
        w.anchors = wj.at("anchors").get<std::size_t>();
        w.rejected = wj.at("rejected").get<std::size_t>();
        w.omitted_before_anchor = wj.at("omitted_before_anchor").get<std::size_t>();
        for (const auto& [k, m] : wj.at("modes").items())
            w.modes[k] = mode_from(m);
        s.wrists.push_back(std::move(w));
    }
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
}

ordered_json to_json(const ErrorReport& r)
{
    ordered_json j;
    j["provenance"] = r.provenance;
    ordered_json pooled = ordered_json::object();
    for (const auto& [k, m] : r.pooled)
        pooled[k] = mode_json(m);
    j["pooled"] = pooled;
    const auto corrected = r.pooled.find("corrected");
    j["overall_mae_cm"] = corrected != r.pooled.end() && corrected->second.lvl
                              ? ordered_json(corrected->second.lvl->mae())
                              : ordered_json(nullptr);
    j["mean_session_lvl_mae_cm"] = r.mean_session_lvl_mae;
    j["rnle_sensitivity_pct"] = opt_json(r.rnle_sensitivity_pct);
    auto det = ordered_json::array();
    for (const auto& d : r.detection)
        det.push_back(detection_json(d));
    j["detection"] = det;
    auto sessions = ordered_json::array();
    for (const auto& s : r.sessions)
        sessions.push_back(to_json(s));
    j["sessions"] = sessions;
    return j;
}

ErrorReport report_from_json(const ordered_json& j)
{
    try {
        ErrorReport r;
        r.provenance = j.at("provenance");
        for (const auto& [k, m] : j.at("pooled").items())
            r.pooled[k] = mode_from(m);
        r.mean_session_lvl_mae =
            j.at("mean_session_lvl_mae_cm").get<std::map<std::string, double>>();
        r.rnle_sensitivity_pct = opt_from<double>(j, "rnle_sensitivity_pct");
        for (const auto& d : j.at("detection"))
            r.detection.push_back(detection_from(d));
        for (const auto& s : j.at("sessions"))
            r.sessions.push_back(session_from_json(s));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidConfig, "eval::report_from_json", e.what());
    }
}

std::string detection_csv(std::span<const DetectionRow> rows)
{
    std::ostringstream out;
    out << "speed,foot,wrist,combination,cycles,covered,rate_pct\n";
    for (const auto& d : rows) {
        out << d.speed << ',' << side_code(d.foot) << ',' << side_code(d.wrist) << ','
            << side_code(d.foot) << "F-" << side_code(d.wrist) << "W," << d.cycles << ','
            << d.covered << ',' << ingest::format_number(d.rate_pct()) << '\n';
    }
    return out.str();
}

}  // namespace kvlu::eval
