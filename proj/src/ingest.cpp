#include "kvlu/ingest.hpp"

#include "kvlu/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kvlu::ingest {

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        auto field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
            field.remove_suffix(1);
        out.push_back(field);
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

bool read_line(std::istream& in, std::string& line)
{
    if (!std::getline(in, line))
        return false;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return true;
}

double parse_number(std::string_view field, std::size_t line, std::size_t column, const char* where)
{
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw Error(Errc::NonNumericValue, where,
                    "line " + std::to_string(line) + " column " + std::to_string(column) + ": '" +
                        std::string(field) + "'",
                    {line, column});
    return v;
}

Side parse_side_field(std::string_view field, std::size_t line, std::size_t column,
                      const char* where)
{
    if (field == "L")
        return Side::Left;
    if (field == "R")
        return Side::Right;
    throw Error(Errc::NonNumericValue, where,
                "line " + std::to_string(line) + " column " + std::to_string(column) +
                    ": side must be L or R",
                {line, column});
}

std::string insole_header()
{
    std::string h = "t,side";
    char buf[8];
    for (std::size_t i = 0; i < kInsoleCells; ++i) {
        std::snprintf(buf, sizeof buf, ",c%02zu", i);
        h += buf;
    }
    return h;
}

// Iterates data rows, skipping blank lines; `fn(fields, line_no)`.
template <class Fn>
void for_each_row(std::istream& in, std::size_t expected_fields, const char* where, Fn fn)
{
    std::string line;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto fields = split_fields(line);
        if (fields.size() != expected_fields)
            throw Error(Errc::BadFieldCount, where,
                        "line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected_fields) + " fields, got " +
                            std::to_string(fields.size()),
                        {line_no});
        fn(fields, line_no);
    }
}

void expect_header(std::istream& in, std::string_view header, const char* where)
{
    std::string line;
    if (!read_line(in, line) || line != header)
        throw Error(Errc::MalformedHeader, where,
                    "expected '" + std::string(header.substr(0, 40)) +
                        (header.size() > 40 ? "...'" : "'"));
}

}  // namespace

std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<WristSample> parse_wrist_csv(std::istream& in)
{
    constexpr const char* where = "ingest::parse_stream(wrist)";
    expect_header(in, "t,pressure_pa,pitch_deg,side", where);
    std::vector<WristSample> out;
    for_each_row(in, 4, where, [&](const auto& f, std::size_t line) {
        WristSample s;
        s.t = parse_number(f[0], line, 1, where);
        s.pressure_pa = parse_number(f[1], line, 2, where);
        s.pitch_deg = parse_number(f[2], line, 3, where);
        s.side = parse_side_field(f[3], line, 4, where);
        out.push_back(s);
    });
    return out;
}

std::vector<InsoleSample> parse_insole_csv(std::istream& in)
{
    constexpr const char* where = "ingest::parse_stream(insole)";
    static const std::string header = insole_header();
    expect_header(in, header, where);
    std::vector<InsoleSample> out;
    for_each_row(in, kInsoleCells + 2, where, [&](const auto& f, std::size_t line) {
        InsoleSample s;
        s.t = parse_number(f[0], line, 1, where);
        s.side = parse_side_field(f[1], line, 2, where);
        for (std::size_t i = 0; i < kInsoleCells; ++i)
            s.cells[i] = parse_number(f[i + 2], line, i + 3, where);
        out.push_back(s);
    });
    return out;
}

std::vector<TruthSample> parse_truth_csv(std::istream& in)
{
    constexpr const char* where = "ingest::parse_stream(truth)";
    std::string header;
    if (!read_line(in, header))
        throw Error(Errc::MalformedHeader, where, "missing header");
    std::size_t fields = 0;
    if (header == "t,wrist_height_cm")
        fields = 2;
    else if (header == "t,wrist_height_cm,load_height_cm")
        fields = 3;
    else
        throw Error(Errc::MalformedHeader, where,
                    "expected 't,wrist_height_cm[,load_height_cm]'");
    std::vector<TruthSample> out;
    for_each_row(in, fields, where, [&](const auto& f, std::size_t line) {
        TruthSample s;
        s.t = parse_number(f[0], line, 1, where);
        s.wrist_height_cm = parse_number(f[1], line, 2, where);
        if (fields == 3 && !f[2].empty())
            s.load_height_cm = parse_number(f[2], line, 3, where);
        out.push_back(s);
    });
    return out;
}

ParsedStream parse_stream(const std::filesystem::path& path, StreamKind kind)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "ingest::parse_stream", "cannot open " + path.string());
    switch (kind) {
    case StreamKind::Wrist: return parse_wrist_csv(in);
    case StreamKind::Insole: return parse_insole_csv(in);
    case StreamKind::GroundTruth: return parse_truth_csv(in);
    }
    throw Error(Errc::InvalidConfig, "ingest::parse_stream", "unknown stream kind");
}

void write_wrist_csv(std::ostream& out, std::span<const WristSample> samples)
{
    out << "t,pressure_pa,pitch_deg,side\n";
    for (const auto& s : samples)
        out << format_number(s.t) << ',' << format_number(s.pressure_pa) << ','
            << format_number(s.pitch_deg) << ',' << side_code(s.side) << '\n';
}

void write_insole_csv(std::ostream& out, std::span<const InsoleSample> samples)
{
    out << insole_header() << '\n';
    for (const auto& s : samples) {
        out << format_number(s.t) << ',' << side_code(s.side);
        for (double c : s.cells)
            out << ',' << format_number(c);
        out << '\n';
    }
}

void write_truth_csv(std::ostream& out, std::span<const TruthSample> samples, bool with_load)
{
    out << (with_load ? "t,wrist_height_cm,load_height_cm\n" : "t,wrist_height_cm\n");
    for (const auto& s : samples) {
        out << format_number(s.t) << ',' << format_number(s.wrist_height_cm);
        if (with_load) {
            out << ',';
            if (s.load_height_cm)
                out << format_number(*s.load_height_cm);
        }
        out << '\n';
    }
}

std::vector<WristStream> split_wrist(std::vector<WristSample> samples)
{
    std::vector<WristStream> out;
    for (Side side : {Side::Left, Side::Right}) {
        WristStream s{side, {}};
        for (const auto& x : samples) {
            if (x.side == side)
                s.samples.push_back(x);
        }
        if (!s.samples.empty())
            out.push_back(std::move(s));
    }
    return out;
}

std::vector<InsoleStream> split_insole(std::vector<InsoleSample> samples, const RegionMap& regions)
{
    std::vector<InsoleStream> out;
    for (Side side : {Side::Left, Side::Right}) {
        InsoleStream s{side, regions, {}};
        for (const auto& x : samples) {
            if (x.side == side)
                s.samples.push_back(x);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Manifest

std::filesystem::path SessionManifest::resolve(const std::filesystem::path& p) const
{
    return p.is_absolute() ? p : base_dir / p;
}

namespace {

std::vector<std::filesystem::path> path_list(const nlohmann::json& j, const char* key)
{
    std::vector<std::filesystem::path> out;
    if (!j.contains(key))
        return out;
    const auto& v = j.at(key);
    if (v.is_string())
        out.emplace_back(v.get<std::string>());
    else
        for (const auto& e : v)
            out.emplace_back(e.get<std::string>());
    return out;
}

}  // namespace

SessionManifest load_manifest(const std::filesystem::path& path)
{
    constexpr const char* where = "ingest::load_manifest";
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, where, "cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidConfig, where, path.string() + ": " + e.what());
    }
    SessionManifest m;
    m.base_dir = path.parent_path();
    try {
        m.subject_id = j.value("subject_id", std::string("subject"));
        if (j.contains("body_height_cm"))
            m.body_height_cm = j.at("body_height_cm").get<double>();
        else if (j.contains("body_height_in"))
            m.body_height_cm = j.at("body_height_in").get<double>() * kInchToCm;
        if (j.contains("wrist_ratio"))
            m.wrist_ratio = j.at("wrist_ratio").get<double>();
        m.wrist = path_list(j, "wrist");
        m.insole = path_list(j, "insole");
        if (j.contains("truth") && !j.at("truth").is_null())
            m.truth = j.at("truth").get<std::string>();
        if (j.contains("region_map") && !j.at("region_map").is_null())
            m.region_map = j.at("region_map").get<std::string>();
        if (j.contains("angle_threshold_deg") && !j.at("angle_threshold_deg").is_null())
            m.angle_threshold_deg = j.at("angle_threshold_deg").get<double>();
        if (j.contains("angle_calibration") && !j.at("angle_calibration").is_null()) {
            const auto& c = j.at("angle_calibration");
            m.angle_calibration = TimeSpan{c.at("start").get<double>(), c.at("end").get<double>()};
        }
        if (j.contains("levels"))
            m.levels = j.at("levels").get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidConfig, where, path.string() + ": " + e.what());
    }
    if (!(m.body_height_cm > 0.0))
        throw Error(Errc::MissingAnthropometry, where, "body_height_cm must be > 0");
    if (m.wrist.empty() || m.insole.empty())
        throw Error(Errc::InvalidConfig, where, "manifest lists no wrist or insole files");
    auto check = [&](const std::filesystem::path& p) {
        if (!std::filesystem::exists(m.resolve(p)))
            throw Error(Errc::Io, where, "referenced file missing: " + m.resolve(p).string());
    };
    for (const auto& p : m.wrist)
        check(p);
    for (const auto& p : m.insole)
        check(p);
    if (m.truth)
        check(*m.truth);
    if (m.region_map)
        check(*m.region_map);
    return m;
}

void write_manifest(const std::filesystem::path& path, const SessionManifest& m)
{
    nlohmann::ordered_json j;
    j["subject_id"] = m.subject_id;
    j["body_height_cm"] = m.body_height_cm;
    if (m.wrist_ratio)
        j["wrist_ratio"] = *m.wrist_ratio;
    auto list = [](const std::vector<std::filesystem::path>& ps) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& p : ps)
            a.push_back(p.generic_string());
        return a;
    };
    j["wrist"] = list(m.wrist);
    j["insole"] = list(m.insole);
    if (m.truth)
        j["truth"] = m.truth->generic_string();
    if (m.region_map)
        j["region_map"] = m.region_map->generic_string();
    if (m.angle_threshold_deg)
        j["angle_threshold_deg"] = *m.angle_threshold_deg;
    if (m.angle_calibration)
        j["angle_calibration"] = {{"start", m.angle_calibration->start},
                                  {"end", m.angle_calibration->end}};
    if (!m.levels.empty())
        j["levels"] = m.levels;
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::Io, "ingest::write_manifest", "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

LoadedSession load_session(const std::filesystem::path& manifest_path)
{
    LoadedSession ls;
    ls.manifest = load_manifest(manifest_path);
    const auto& m = ls.manifest;

    RegionMap regions = default_region_map();
    if (m.region_map) {
        std::ifstream in(m.resolve(*m.region_map));
        std::stringstream buf;
        buf << in.rdbuf();
        regions = RegionMap::parse(buf.str());
    }

    std::vector<WristSample> wrist;
    for (const auto& p : m.wrist) {
        auto s = std::get<std::vector<WristSample>>(parse_stream(m.resolve(p), StreamKind::Wrist));
        wrist.insert(wrist.end(), s.begin(), s.end());
    }
    std::vector<InsoleSample> insole;
    for (const auto& p : m.insole) {
        auto s =
            std::get<std::vector<InsoleSample>>(parse_stream(m.resolve(p), StreamKind::Insole));
        insole.insert(insole.end(), s.begin(), s.end());
    }
    // Files may be listed per side; a stable sort restores time order without
    // reordering rows that share a timestamp.
    std::stable_sort(wrist.begin(), wrist.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    std::stable_sort(insole.begin(), insole.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });

    auto insoles = split_insole(std::move(insole), regions);
    Anthropometry anthro{m.body_height_cm, m.wrist_ratio.value_or(kDefaultWristRatio)};
    ls.session = validate_session(split_wrist(std::move(wrist)), std::move(insoles[0]),
                                  std::move(insoles[1]), anthro);
    if (m.truth)
        ls.truth = std::get<std::vector<TruthSample>>(
            parse_stream(m.resolve(*m.truth), StreamKind::GroundTruth));
    return ls;
}

// ---------------------------------------------------------------------------
// Alignment

std::vector<double> reference_timeline(double start, double end, double rate_hz)
{
    if (!(rate_hz > 0.0))
        throw Error(Errc::InvalidConfig, "ingest::align", "reference rate must be > 0");
    std::vector<double> out;
    const double slack = 1e-9 / rate_hz;
    for (std::size_t k = 0;; ++k) {
        const double t = start + static_cast<double>(k) / rate_hz;
        if (t > end + slack)
            break;
        out.push_back(t);
    }
    return out;
}

std::vector<std::optional<std::size_t>> nearest_indices(std::span<const double> sample_times,
                                                        std::span<const double> timeline,
                                                        double tolerance)
{
    std::vector<std::optional<std::size_t>> out(timeline.size());
    std::size_t j = 0;
    for (std::size_t k = 0; k < timeline.size(); ++k) {
        const double t = timeline[k];
        while (j + 1 < sample_times.size() && sample_times[j + 1] <= t)
            ++j;
        if (sample_times.empty())
            continue;
        std::size_t best = j;
        if (j + 1 < sample_times.size() &&
            std::abs(sample_times[j + 1] - t) < std::abs(sample_times[j] - t))
            best = j + 1;
        if (std::abs(sample_times[best] - t) <= tolerance)
            out[k] = best;
    }
    return out;
}

AlignedSession align(const Session& session, double reference_rate_hz)
{
    constexpr const char* where = "ingest::align";
    double start = 0.0;
    double end = 0.0;
    bool first = true;
    auto widen = [&](std::span<const double> t) {
        if (t.empty())
            throw Error(Errc::EmptyStream, where, "cannot align an empty stream");
        if (first) {
            start = t.front();
            end = t.back();
            first = false;
        } else {
            start = std::max(start, t.front());
            end = std::min(end, t.back());
        }
    };
    std::vector<std::vector<double>> wrist_times;
    for (const auto& w : session.wrist) {
        wrist_times.push_back(times_of(w));
        widen(wrist_times.back());
    }
    const auto lt = times_of(session.left);
    const auto rt = times_of(session.right);
    widen(lt);
    widen(rt);
    if (start > end)
        throw Error(Errc::NoTemporalOverlap, where, "streams share no common time range");

    AlignedSession a;
    a.timeline = reference_timeline(start, end, reference_rate_hz);
    const double tol = 0.5 / reference_rate_hz;
    for (const auto& w : session.wrist)
        a.wrist.emplace_back(w.side, resample_nearest<WristSample>(w.samples, a.timeline, tol));
    a.left = resample_nearest<InsoleSample>(session.left.samples, a.timeline, tol);
    a.right = resample_nearest<InsoleSample>(session.right.samples, a.timeline, tol);
    return a;
}

std::vector<std::pair<std::size_t, std::size_t>> contiguous_segments(std::span<const double> times,
                                                                     double max_gap_s)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (times.empty())
        return out;
    std::size_t begin = 0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] - times[i - 1] > max_gap_s) {
            out.emplace_back(begin, i);
            begin = i;
        }
    }
    out.emplace_back(begin, times.size());
    return out;
}

// ---------------------------------------------------------------------------
// Smoothing

WristStream smooth_pressure(const WristStream& stream, std::size_t window, double max_gap_s)
{
    if (window == 0 || window % 2 == 0)
        throw Error(Errc::EvenWindow, "ingest::smooth_pressure",
                    "window must be odd and >= 1, got " + std::to_string(window));
    WristStream out = stream;
    if (window == 1)
        return out;
    const std::size_t half = window / 2;
    const auto t = times_of(stream);
    for (auto [begin, end] : contiguous_segments(t, max_gap_s)) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t lo = i - std::min(half, i - begin);
            const std::size_t hi = std::min(end - 1, i + half);
            const double ref = stream.samples[i].pressure_pa;
            double sum = 0.0;
            for (std::size_t k = lo; k <= hi; ++k)
                sum += stream.samples[k].pressure_pa - ref;
            out.samples[i].pressure_pa = ref + sum / static_cast<double>(hi - lo + 1);
        }
    }
    return out;
}

}  // namespace kvlu::ingest
