#pragma once

// Pressure -> load vertical location.
//
//   LVL(t) = a * (P(t) - P_anchor) + h_anchor + b
//
// The real-time trace always uses the latest accepted anchor at or before t.
// The retrospective trace additionally removes, between consecutive anchors,
// the linear drift implied by the mismatch at the later anchor.

#include "kvlu/model.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace kvlu::lvl {

// Ordinary least squares over (delta pressure Pa, delta height cm) pairs.
// Throws DegeneratePairs when fewer than two distinct pressure deltas exist.
PressureHeightModel fit_pressure_height_model(std::span<const std::pair<double, double>> pairs);

struct LvlConfig {
    // Anchors whose implied correction exceeds the gate are skipped. The gate
    // is max_anchor_jump_cm plus drift_allowance_cm_per_s for every second
    // since the active anchor, since genuine barometric drift keeps
    // accumulating between anchors. A skipped anchor is accepted anyway once
    // the next candidate agrees with it, so a real offset cannot lock the
    // gate shut.
    double max_anchor_jump_cm = 30.0;
    double drift_allowance_cm_per_s = 5.0;
    bool gate_enabled = true;

    void validate() const;
};

// Throws NoAnchor when no point belongs to the stream's wrist.
LvlTrace estimate_lvl_realtime(const WristStream& wrist, std::span<const KvluPoint> points,
                               const PressureHeightModel& model, const LvlConfig& cfg = {});

// Uncalibrated reference: the first anchor only, never updated.
LvlTrace estimate_lvl_raw(const WristStream& wrist, std::span<const KvluPoint> points,
                          const PressureHeightModel& model);

// Piecewise-linear drift removal between the trace's accepted anchors. No
// correction is extrapolated past the last anchor. Throws FewerThanTwoAnchors.
LvlTrace correct_drift_retrospective(const LvlTrace& trace, const PressureHeightModel& model);

// Wrist-minus-load offset (cm) at time t, e.g. a per-level bias table.
using BiasHook = std::function<double(double)>;

// Marks the trace as a load-height proxy. Values pass through unchanged
// unless a bias hook is given, in which case its offset is subtracted.
LvlTrace wrist_height_as_lvl(LvlTrace trace, const BiasHook& bias = {});

}  // namespace kvlu::lvl
