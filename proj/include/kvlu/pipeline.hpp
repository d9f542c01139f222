#pragma once

// End-to-end processing of one session and the per-session artifacts.

#include "kvlu/anchor.hpp"
#include "kvlu/eval.hpp"
#include "kvlu/gait.hpp"
#include "kvlu/ingest.hpp"
#include "kvlu/lvl.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kvlu::pipeline {

struct PipelineConfig {
    std::optional<double> wrist_ratio;          // overrides the manifest
    std::optional<double> angle_threshold_deg;  // overrides manifest and calibration
    std::size_t smooth_window = ingest::kDefaultSmoothWindow;
    double max_gap_s = ingest::kDefaultMaxGapS;
    PressureHeightModel model = PressureHeightModel::hydrostatic();
    lvl::LvlConfig lvl;
    gait::GaitConfig gait;

    void validate() const;
    // Every effective value, including the defaults.
    nlohmann::ordered_json provenance() const;
};

struct WristResult {
    Side side = Side::Left;
    WristStream smoothed;
    std::optional<LvlTrace> realtime;
    std::optional<LvlTrace> corrected;
    std::optional<LvlTrace> raw;
};

struct SessionResult {
    std::string subject_id;
    Anthropometry anthro;
    anchor::AngleThreshold threshold;
    std::string threshold_source;  // cli / manifest / calibration / cohort
    gait::FootAnalysis left;
    gait::FootAnalysis right;
    std::vector<IntervalLabel> activities;
    std::vector<gait::GaitCycle> cycles;  // both feet, time ordered
    std::vector<KvluPoint> points;        // all wrists, time ordered
    std::vector<WristResult> wrists;
    std::vector<std::string> warnings;
};

SessionResult run_session(const Session& session, const ingest::SessionManifest& manifest,
                          const PipelineConfig& cfg);

// Cadence buckets halfway between the simulator's default cycle lengths.
std::string speed_class(double cycle_duration_s);

eval::SessionReport evaluate_session(const SessionResult& result,
                                     std::span<const ingest::TruthSample> truth,
                                     const std::map<std::string, double>& levels);

// Artifacts.
void write_kvlu_points_csv(std::ostream& out, std::span<const KvluPoint> points);
// t,lvl_cm,anchor_t,mode for each available trace in order.
void write_lvl_csv(std::ostream& out, const WristResult& w);
// t,raw_cm,realtime_cm,corrected_cm,truth_cm on the realtime trace's samples.
void write_trace_compare_csv(std::ostream& out, const WristResult& w,
                             std::span<const ingest::TruthSample> truth);

}  // namespace kvlu::pipeline
