#pragma once

// Gait-phase segmentation from plantar pressure.
//
// Swing phases are bootstrapped with a fraction-of-peak rule on total GRF.
// The swing samples then set the dynamic heel / forefoot contact thresholds
// (mean + 3 sigma of the unloaded-region force), and foot flat is the
// conjunction of both regions exceeding their thresholds.

#include "kvlu/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kvlu::gait {

struct GaitConfig {
    double swing_fraction = 0.05;
    double peak_window_s = 3.0;  // centered window for the rolling peak
    double min_swing_s = 0.1;
    double min_foot_flat_s = 0.1;
    double min_stream_s = 2.0;
    std::size_t min_swing_samples = 10;
    double standing_load_min_n = 100.0;
    double standing_min_s = 1.0;
    double cycle_min_s = 0.6;
    double cycle_max_s = 2.5;
    double max_gap_s = 1.0;

    void validate() const;
};

// Region sums of an insole stream, one entry per sample.
struct GrfSeries {
    Side side = Side::Left;
    std::vector<double> t;
    std::vector<double> heel;
    std::vector<double> midfoot;
    std::vector<double> forefoot;
    std::vector<double> total;

    std::size_t size() const { return t.size(); }
};

GrfSeries grf_series(const InsoleStream& stream);

struct SwingDetection {
    std::vector<IntervalLabel> intervals;
    std::vector<std::string> warnings;
};

struct RegionThresholds {
    double heel = 0.0;
    double forefoot = 0.0;
    double heel_mean = 0.0;
    double heel_sigma = 0.0;
    double forefoot_mean = 0.0;
    double forefoot_sigma = 0.0;
    std::size_t n_swing = 0;
    std::vector<TimeSpan> computed_from;
};

struct GaitCycle {
    Side side = Side::Left;
    double start = 0.0;  // heel strike
    double end = 0.0;    // next heel strike
    std::optional<IntervalLabel> foot_flat;
    IntervalLabel swing;

    bool contains(double t) const { return t >= start && t < end; }
};

// Turns a per-sample predicate into half-open intervals [t_first, t_after_last)
// of at least `min_duration`. Runs never bridge gaps longer than `max_gap_s`.
std::vector<IntervalLabel> runs_to_intervals(std::span<const double> t,
                                             const std::vector<bool>& mask, double min_duration,
                                             IntervalSide side, PhaseLabel label,
                                             double max_gap_s);

// Throws StreamTooShort.
SwingDetection detect_swing(const InsoleStream& stream, const GaitConfig& cfg = {});
SwingDetection detect_swing(const GrfSeries& grf, const GaitConfig& cfg = {});

// Throws InsufficientSwingSamples.
RegionThresholds region_thresholds(const GrfSeries& grf, std::span<const IntervalLabel> swings,
                                   const GaitConfig& cfg = {});
RegionThresholds region_thresholds(const InsoleStream& stream,
                                   std::span<const IntervalLabel> swings,
                                   const GaitConfig& cfg = {});

std::vector<IntervalLabel> detect_foot_flat(const GrfSeries& grf, const RegionThresholds& thr,
                                            const GaitConfig& cfg = {});
std::vector<IntervalLabel> detect_foot_flat(const InsoleStream& stream,
                                            const RegionThresholds& thr,
                                            const GaitConfig& cfg = {});

// Standing / Walking / Unknown intervals (side Both) tiling the span covered
// by the two streams.
std::vector<IntervalLabel> classify_activity(const InsoleStream& left, const InsoleStream& right,
                                             const GaitConfig& cfg = {});
std::vector<IntervalLabel> classify_activity(const GrfSeries& left, const GrfSeries& right,
                                             std::span<const IntervalLabel> left_swings,
                                             std::span<const IntervalLabel> right_swings,
                                             const GaitConfig& cfg = {});

// Heel-strike to heel-strike cycles (swing end to next swing end) of one foot
// inside walking intervals. foot_flat is the longest detected foot-flat
// interval in the cycle's stance part.
std::vector<GaitCycle> segment_cycles(Side side, std::span<const IntervalLabel> swings,
                                      std::span<const IntervalLabel> foot_flats,
                                      std::span<const IntervalLabel> activities);

// Everything the pipeline needs from one foot.
struct FootAnalysis {
    Side side = Side::Left;
    GrfSeries grf;
    std::vector<IntervalLabel> swings;
    std::optional<RegionThresholds> thresholds;
    std::vector<IntervalLabel> foot_flats;
    std::vector<std::string> warnings;
};

FootAnalysis analyze_foot(const InsoleStream& stream, const GaitConfig& cfg = {});

}  // namespace kvlu::gait
