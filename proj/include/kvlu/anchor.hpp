#pragma once

// KVLU reference-point detection: moments where the wrist is at a known
// height because the arm hangs vertically while the body is upright.
//
// A wrist is "vertical" when its pitch exceeds a threshold of
// mean - 3 sigma over normal-standing calibration angles. Anchors are taken
// from standing runs (one per run, at its temporal midpoint) and from
// walking foot-flat phases (first or last qualifying sample, whichever is
// nearer the phase midpoint). The known height is body height times the
// wrist-to-body ratio.

#include "kvlu/gait.hpp"
#include "kvlu/model.hpp"

#include <map>
#include <span>
#include <utility>
#include <vector>

namespace kvlu::anchor {

// Cohort threshold from ten subjects' normal standing.
inline constexpr double kCohortAngleThresholdDeg = 58.5;
inline constexpr std::size_t kMinAngleSamples = 10;

struct AngleThreshold {
    double value = kCohortAngleThresholdDeg;
    double mean = kCohortAngleThresholdDeg;
    double sigma = 0.0;
    std::size_t n = 0;  // 0 for the shipped cohort default

    static AngleThreshold cohort_default() { return {}; }
};

// mean(samples) - 3 * population sigma. Throws TooFewSamples below 10.
AngleThreshold compute_angle_threshold(std::span<const double> angles_deg);

double estimate_wrist_height(const Anthropometry& anthro);

// Mean of wrist_height / body_height over (standing wrist height cm,
// body height cm) pairs.
double refit_wrist_ratio(std::span<const std::pair<double, double>> wrist_body_pairs);

// One anchor per contiguous run of samples with pitch > threshold inside each
// standing interval, at the sample nearest the run's temporal midpoint
// (earlier on ties). Pressure should already be smoothed.
std::vector<KvluPoint> detect_kvlu_standing(std::span<const IntervalLabel> standing,
                                            const WristStream& wrist,
                                            const AngleThreshold& threshold,
                                            const Anthropometry& anthro);

// At most one anchor per (cycle, foot, wrist): among samples in the cycle's
// foot-flat phase with pitch > threshold, the first or the last, whichever is
// nearer the phase midpoint (earlier on ties).
std::vector<KvluPoint> detect_kvlu_walking(std::span<const gait::GaitCycle> cycles,
                                           const WristStream& wrist,
                                           const AngleThreshold& threshold,
                                           const Anthropometry& anthro);

// Foot x wrist combination, e.g. LF-RW.
struct Combination {
    Side foot = Side::Left;
    Side wrist = Side::Left;

    friend auto operator<=>(const Combination&, const Combination&) = default;
};

std::string combination_name(Combination c);

// 100 * (cycles of the foot with >= 1 anchor of the combination) / (cycles of
// that foot). A foot without cycles has no entry for its combinations.
// Throws NoCycles when `cycles` is empty.
std::map<Combination, double> kvlu_detection_rate(std::span<const gait::GaitCycle> cycles,
                                                  std::span<const KvluPoint> points);

}  // namespace kvlu::anchor
