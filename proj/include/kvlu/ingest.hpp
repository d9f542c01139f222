#pragma once

// Session file formats, multi-rate alignment and pressure smoothing.
//
//   wrist CSV   : t,pressure_pa,pitch_deg,side          (side L or R)
//   insole CSV  : t,side,c00..c95                       (newtons)
//   truth CSV   : t,wrist_height_cm[,load_height_cm]    (empty load = none)
//   manifest    : JSON, paths relative to the manifest file

#include "kvlu/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace kvlu::ingest {

struct TruthSample {
    double t = 0.0;
    double wrist_height_cm = 0.0;
    std::optional<double> load_height_cm;

    friend bool operator==(const TruthSample&, const TruthSample&) = default;
};

enum class StreamKind { Wrist, Insole, GroundTruth };

using ParsedStream =
    std::variant<std::vector<WristSample>, std::vector<InsoleSample>, std::vector<TruthSample>>;

std::vector<WristSample> parse_wrist_csv(std::istream& in);
std::vector<InsoleSample> parse_insole_csv(std::istream& in);
std::vector<TruthSample> parse_truth_csv(std::istream& in);
ParsedStream parse_stream(const std::filesystem::path& path, StreamKind kind);

void write_wrist_csv(std::ostream& out, std::span<const WristSample> samples);
void write_insole_csv(std::ostream& out, std::span<const InsoleSample> samples);
void write_truth_csv(std::ostream& out, std::span<const TruthSample> samples, bool with_load);

// Shortest text that parses back to the identical double.
std::string format_number(double v);

std::vector<WristStream> split_wrist(std::vector<WristSample> samples);
std::vector<InsoleStream> split_insole(std::vector<InsoleSample> samples, const RegionMap& regions);

// ---------------------------------------------------------------------------

struct SessionManifest {
    std::string subject_id;
    double body_height_cm = 0.0;
    std::optional<double> wrist_ratio;
    std::vector<std::filesystem::path> wrist;   // CSV files, any mix of sides
    std::vector<std::filesystem::path> insole;  // CSV files, any mix of sides
    std::optional<std::filesystem::path> truth;
    std::optional<std::filesystem::path> region_map;
    std::optional<double> angle_threshold_deg;
    // Interval of normal standing used for a per-subject angle threshold.
    std::optional<TimeSpan> angle_calibration;
    // Load level label -> load height (cm), for per-level error grouping.
    std::map<std::string, double> levels;

    // Resolved against the manifest directory.
    std::filesystem::path base_dir;
    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

SessionManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const SessionManifest& m);

struct LoadedSession {
    SessionManifest manifest;
    Session session;
    std::vector<TruthSample> truth;
};

LoadedSession load_session(const std::filesystem::path& manifest_path);

// ---------------------------------------------------------------------------

// Reference timeline start + k / rate covering [start, end].
std::vector<double> reference_timeline(double start, double end, double rate_hz);

// Nearest sample (earlier on ties) within `tolerance` of each timeline point.
std::vector<std::optional<std::size_t>> nearest_indices(std::span<const double> sample_times,
                                                        std::span<const double> timeline,
                                                        double tolerance);

template <class S>
std::vector<std::optional<S>> resample_nearest(std::span<const S> samples,
                                               std::span<const double> timeline,
                                               double tolerance)
{
    std::vector<double> t;
    t.reserve(samples.size());
    for (const auto& s : samples)
        t.push_back(s.t);
    const auto idx = nearest_indices(t, timeline, tolerance);
    std::vector<std::optional<S>> out;
    out.reserve(idx.size());
    for (const auto& i : idx)
        out.push_back(i ? std::optional<S>(samples[*i]) : std::nullopt);
    return out;
}

struct AlignedSession {
    std::vector<double> timeline;
    std::vector<std::pair<Side, std::vector<std::optional<WristSample>>>> wrist;
    std::vector<std::optional<InsoleSample>> left;
    std::vector<std::optional<InsoleSample>> right;
};

// Nearest-neighbour resampling of every stream onto a common timeline over the
// streams' overlap, tolerance 0.5 / reference_rate. Throws NoTemporalOverlap.
AlignedSession align(const Session& session, double reference_rate_hz);

// Split points where consecutive samples are more than `max_gap_s` apart.
// Returns [begin, end) index ranges.
std::vector<std::pair<std::size_t, std::size_t>> contiguous_segments(std::span<const double> times,
                                                                     double max_gap_s);

inline constexpr std::size_t kDefaultSmoothWindow = 41;
inline constexpr double kDefaultMaxGapS = 1.0;

// Centered moving average of pressure; near the edges (of the stream and of
// each gap-delimited segment) the window is truncated to the available
// neighbours. Throws EvenWindow.
WristStream smooth_pressure(const WristStream& stream, std::size_t window,
                            double max_gap_s = kDefaultMaxGapS);

}  // namespace kvlu::ingest
