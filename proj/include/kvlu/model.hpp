#pragma once

// Shared domain types for the load-vertical-location pipeline.
//
// Units are fixed throughout: pascals, centimeters, seconds, degrees and
// newtons. Inches only appear at the CLI boundary.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kvlu {

enum class Side : std::uint8_t { Left, Right };
enum class IntervalSide : std::uint8_t { Left, Right, Both };
enum class PhaseLabel : std::uint8_t { Swing, FootFlat, StanceOther, Standing, Walking, Unknown };
enum class Region : std::uint8_t { Heel, Midfoot, Forefoot, Total };
enum class AnchorSource : std::uint8_t { Standing, RF, LF };

std::string_view to_string(Side s);
std::string_view to_string(IntervalSide s);
std::string_view to_string(PhaseLabel l);
std::string_view to_string(Region r);
std::string_view to_string(AnchorSource s);
// "L"/"R" as used in the CSV formats.
std::string_view side_code(Side s);

std::optional<Side> parse_side(std::string_view text);
std::optional<IntervalSide> parse_interval_side(std::string_view text);
std::optional<PhaseLabel> parse_phase_label(std::string_view text);
std::optional<AnchorSource> parse_anchor_source(std::string_view text);

inline IntervalSide to_interval_side(Side s)
{
    return s == Side::Left ? IntervalSide::Left : IntervalSide::Right;
}
inline AnchorSource foot_source(Side foot)
{
    return foot == Side::Left ? AnchorSource::LF : AnchorSource::RF;
}
inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

inline constexpr std::size_t kInsoleCells = 96;
inline constexpr double kInchToCm = 2.54;

// Per-cell region labels of the 96-cell plantar grid. Cells are laid out
// row-major in 12 rows of 8, row 0 at the toes.
class RegionMap {
public:
    static constexpr std::size_t kRows = 12;
    static constexpr std::size_t kCols = 8;

    // Front 40% of the insole length is forefoot, rear 30% heel.
    static RegionMap longitudinal(double forefoot_fraction = 0.4, double heel_fraction = 0.3);
    // 96 whitespace/comma separated tokens, each H, M or F.
    static RegionMap parse(std::string_view text);

    explicit RegionMap(const std::array<Region, kInsoleCells>& labels);

    Region at(std::size_t cell) const { return labels_[cell]; }
    std::size_t count(Region r) const;
    std::string serialize() const;

    friend bool operator==(const RegionMap&, const RegionMap&) = default;

private:
    std::array<Region, kInsoleCells> labels_;
};

const RegionMap& default_region_map();

struct WristSample {
    double t = 0.0;
    double pressure_pa = 0.0;
    double pitch_deg = 0.0;
    Side side = Side::Left;

    friend bool operator==(const WristSample&, const WristSample&) = default;
};

struct InsoleSample {
    double t = 0.0;
    Side side = Side::Left;
    std::array<double, kInsoleCells> cells{};

    friend bool operator==(const InsoleSample&, const InsoleSample&) = default;
};

struct WristStream {
    Side side = Side::Left;
    std::vector<WristSample> samples;

    friend bool operator==(const WristStream&, const WristStream&) = default;
};

struct InsoleStream {
    Side side = Side::Left;
    RegionMap regions = default_region_map();
    std::vector<InsoleSample> samples;

    friend bool operator==(const InsoleStream&, const InsoleStream&) = default;
};

// Summed force over one region (or Total, all 96 cells).
double region_grf(const InsoleSample& sample, Region region,
                  const RegionMap& regions = default_region_map());

// Half-open time span [start, end).
struct TimeSpan {
    double start = 0.0;
    double end = 0.0;

    double duration() const { return end - start; }
    bool contains(double t) const { return t >= start && t < end; }
    double midpoint() const { return 0.5 * (start + end); }

    friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

// Interval algebra over sorted, disjoint span lists.
std::vector<TimeSpan> normalize(std::vector<TimeSpan> spans);
std::vector<TimeSpan> intersect(std::span<const TimeSpan> a, std::span<const TimeSpan> b);
std::vector<TimeSpan> subtract(std::span<const TimeSpan> a, std::span<const TimeSpan> b);
double total_duration(std::span<const TimeSpan> spans);

struct IntervalLabel {
    double start = 0.0;
    double end = 0.0;
    IntervalSide side = IntervalSide::Both;
    PhaseLabel label = PhaseLabel::Unknown;

    TimeSpan span() const { return {start, end}; }
    double duration() const { return end - start; }
    double midpoint() const { return 0.5 * (start + end); }
    bool contains(double t) const { return t >= start && t < end; }

    friend bool operator==(const IntervalLabel&, const IntervalLabel&) = default;
};

std::vector<TimeSpan> spans_of(std::span<const IntervalLabel> labels);
std::vector<TimeSpan> spans_of(std::span<const IntervalLabel> labels, PhaseLabel which);

struct Anthropometry {
    double body_height_cm = 0.0;
    double wrist_ratio = 0.495;

    // Throws InvalidConfig unless body_height > 0 and 0 < ratio < 1.
    void validate() const;
};

inline constexpr double kDefaultWristRatio = 0.495;

struct KvluPoint {
    double t = 0.0;
    Side wrist_side = Side::Left;
    AnchorSource source = AnchorSource::Standing;
    double anchor_pressure_pa = 0.0;
    double known_height_cm = 0.0;

    friend bool operator==(const KvluPoint&, const KvluPoint&) = default;
};

// Affine map from pressure change to height change. `a` is negative.
struct PressureHeightModel {
    double a_cm_per_pa = 0.0;
    double b_cm = 0.0;

    // a = -1/(rho g), converted to cm/Pa.
    static PressureHeightModel hydrostatic(double air_density_kg_m3 = 1.225,
                                           double gravity_m_s2 = 9.80665);

    void validate() const;

    friend bool operator==(const PressureHeightModel&, const PressureHeightModel&) = default;
};

enum class TraceMode : std::uint8_t { Realtime, Corrected, Raw };
std::string_view to_string(TraceMode m);

struct LvlSample {
    double t = 0.0;
    double lvl_cm = 0.0;
    std::optional<std::size_t> anchor;  // index into LvlTrace::anchors

    friend bool operator==(const LvlSample&, const LvlSample&) = default;
};

struct LvlTrace {
    Side wrist_side = Side::Left;
    TraceMode mode = TraceMode::Realtime;
    std::vector<LvlSample> samples;
    std::vector<KvluPoint> anchors;   // accepted, strictly increasing in time
    std::vector<KvluPoint> rejected;  // skipped by the anchor jump gate
    std::size_t omitted_before_anchor = 0;
    bool load_proxy = false;
};

struct StreamStats {
    std::string name;
    std::size_t samples = 0;
    std::size_t duplicates_dropped = 0;
    double rate_hz = 0.0;

    friend bool operator==(const StreamStats&, const StreamStats&) = default;
};

struct Session {
    std::vector<WristStream> wrist;
    InsoleStream left;
    InsoleStream right;
    Anthropometry anthro;
    std::vector<StreamStats> stats;
    std::vector<std::string> warnings;

    const WristStream* wrist_stream(Side side) const;
};

// Sorted check, duplicate-timestamp removal, range checks and rate estimates.
// Throws EmptyStream, NonMonotonicTime, MissingAnthropometry or OutOfRange.
Session validate_session(std::vector<WristStream> wrist, std::optional<InsoleStream> left,
                         std::optional<InsoleStream> right,
                         std::optional<Anthropometry> anthro);

// Rate from the median positive sample interval; 0 for fewer than two samples.
double estimate_rate_hz(std::span<const double> times);
double median_interval(std::span<const double> times);

std::vector<double> times_of(const WristStream& s);
std::vector<double> times_of(const InsoleStream& s);

}  // namespace kvlu
