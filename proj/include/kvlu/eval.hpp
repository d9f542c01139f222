#pragma once

// Error metrics and the evaluation report.
//
// Every error group is kept as running sums (n, sum|e|, sum e, sum e^2) so
// that per-session rows can be pooled exactly: the pooled MAE is the mean
// over all samples, not the mean of per-session MAEs.

#include "kvlu/model.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kvlu::eval {

// Mean absolute error. Throws EmptyGroup.
double mae(std::span<const double> estimates, std::span<const double> truth);

struct MeanError {
    double me = 0.0;
    double std = 0.0;  // population
};
// Signed mean of (estimate - truth) and its population std. Throws EmptyGroup.
MeanError mean_error(std::span<const double> estimates, std::span<const double> truth);

struct Accum {
    std::size_t n = 0;
    double sum_abs = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double error);
    void merge(const Accum& o);
    double mae() const;
    double me() const;
    double me_std() const;

    friend bool operator==(const Accum&, const Accum&) = default;
};

struct Grouped {
    std::map<std::string, Accum> groups;
    Accum overall;
};

// Per-group and overall accumulation. Throws EmptyGroup for empty input or a
// size mismatch between the three spans.
Grouped grouped_errors(std::span<const double> estimates, std::span<const double> truth,
                       std::span<const std::string> groups);

// 100 * (1 - |est - true| / true). Throws NonPositiveTruth.
double accuracy_pct(double estimated_cm, double true_cm);

// Lifting-index change (%) implied by an LVL error: 1% per 3.3 cm.
double rnle_sensitivity(double mae_cm);

// ---------------------------------------------------------------------------

struct DetectionRow {
    std::string speed;  // slow / normal / fast, from cadence
    Side foot = Side::Left;
    Side wrist = Side::Left;
    std::size_t cycles = 0;
    std::size_t covered = 0;

    double rate_pct() const;
    friend bool operator==(const DetectionRow&, const DetectionRow&) = default;
};

struct ModeErrors {
    std::optional<Accum> wrist;  // against true wrist height, post-anchor samples
    std::map<std::string, Accum> levels;  // load proxy against load height, per level
    std::optional<Accum> lvl;  // all levels

    friend bool operator==(const ModeErrors&, const ModeErrors&) = default;
};

struct WristReport {
    Side side = Side::Left;
    std::size_t anchors = 0;
    std::size_t rejected = 0;
    std::size_t omitted_before_anchor = 0;
    std::map<std::string, ModeErrors> modes;  // realtime / corrected / raw

    friend bool operator==(const WristReport&, const WristReport&) = default;
};

struct SessionReport {
    std::string subject_id;
    double body_height_cm = 0.0;
    double wrist_ratio = 0.0;
    double estimated_wrist_height_cm = 0.0;
    std::optional<double> true_wrist_height_cm;
    std::optional<double> accuracy_pct;
    double angle_threshold_deg = 0.0;
    std::string angle_threshold_source;
    std::size_t cycles_left = 0;
    std::size_t cycles_right = 0;
    std::size_t kvlu_points = 0;
    std::vector<DetectionRow> detection;
    std::vector<WristReport> wrists;
    std::vector<std::string> warnings;

    friend bool operator==(const SessionReport&, const SessionReport&) = default;
};

struct ErrorReport {
    nlohmann::ordered_json provenance = nlohmann::ordered_json::object();
    std::vector<SessionReport> sessions;
    std::map<std::string, ModeErrors> pooled;  // per mode, over all sessions and wrists
    std::map<std::string, double> mean_session_lvl_mae;  // per mode
    std::vector<DetectionRow> detection;  // pooled per (speed, foot, wrist)
    std::optional<double> rnle_sensitivity_pct;  // from pooled corrected LVL MAE

    friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

// Pools the session rows. Sessions are sorted by subject id so the result
// does not depend on processing order.
ErrorReport build_report(std::vector<SessionReport> sessions,
                         nlohmann::ordered_json provenance = nlohmann::ordered_json::object());

nlohmann::ordered_json to_json(const ErrorReport& r);
ErrorReport report_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const SessionReport& s);
SessionReport session_from_json(const nlohmann::ordered_json& j);

// speed,foot,wrist,combination,cycles,covered,rate_pct
std::string detection_csv(std::span<const DetectionRow> rows);

}  // namespace kvlu::eval
