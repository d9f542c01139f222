#pragma once

// Deterministic synthetic sessions with exact ground truth.
//
// Body kinematics are deliberately simple: the wrist sits at ratio * height
// whenever the arm hangs, walking swings the arm about the vertical with one
// peak per stride at the opposite foot's mid-stance, and lifts move the
// wrist on a raised-cosine path to the load. Pressure follows the
// hydrostatic model plus drift and noise.

#include "kvlu/ingest.hpp"
#include "kvlu/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kvlu::sim {

enum class Speed { Slow, Normal, Fast };
std::string_view to_string(Speed s);
std::optional<Speed> parse_speed(std::string_view text);

struct Stand {
    double duration_s = 30.0;
};

struct Walk {
    double duration_s = 60.0;
    Speed speed = Speed::Normal;
};

struct LiftSet {
    std::string level;  // ground / knee / waist / shoulder or any label
    double level_cm = 0.0;
    int repetitions = 1;
    double hold_s = 3.0;
    double stand_s = 5.0;  // normal standing after each lift
};

using Activity = std::variant<Stand, Walk, LiftSet>;

struct DriftSpec {
    double linear_pa_per_s = 0.0;
    double sin_amplitude_pa = 0.0;
    double sin_period_s = 60.0;
    double sin_phase_rad = 0.0;
    double random_walk_pa_per_sqrt_s = 0.0;
};

struct NoiseSpec {
    double pressure_pa = 0.0;
    double pitch_deg = 0.0;
    double grf_n = 0.0;
};

struct GaitShape {
    double cycle_s = 1.1;
    double arm_swing_deg = 30.0;  // peak-to-trough pitch excursion
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::string subject_id = "sim";
    double body_height_cm = 172.0;
    double wrist_ratio = kDefaultWristRatio;
    double body_mass_kg = 70.0;
    std::vector<Activity> script;
    DriftSpec drift;
    NoiseSpec noise;
    GaitShape slow{1.6, 20.0};
    GaitShape normal{1.1, 30.0};
    GaitShape fast{0.85, 40.0};
    double stance_fraction = 0.6;
    // Shoulder-to-wrist length. Nonzero lifts the wrist while the arm swings
    // away from vertical; zero keeps it at the standing height.
    double arm_length_cm = 0.0;
    double lift_pitch_deg = 30.0;
    double lift_transition_s = 1.0;
    // Wrist minus load height while holding, per level label.
    std::map<std::string, double> wrist_above_load_cm{
        {"ground", 5.0}, {"knee", 4.0}, {"waist", 0.0}, {"shoulder", -2.0}};
    double p0_pa = 101325.0;
    double a_true_cm_per_pa = 0.0;  // 0 selects the hydrostatic value
    double wrist_rate_hz = 50.0;
    double insole_rate_hz = 50.0;

    const GaitShape& gait(Speed s) const;
    double a_true() const;
    double total_duration() const;
    // Throws InvalidConfig.
    void validate() const;
};

// Paper-style protocol: 30 s standing, three 60 s walks (slow, normal, fast),
// then `reps` lifts at each of the four levels with standing in between.
SimConfig default_protocol(std::uint64_t seed = 1, int reps = 3);

struct GroundTruth {
    std::vector<ingest::TruthSample> samples;       // on the wrist timeline
    std::vector<IntervalLabel> activities;          // Standing / Walking, side Both
    std::vector<IntervalLabel> phases;              // per foot Swing / FootFlat / StanceOther
    std::vector<IntervalLabel> lifts;               // hold periods, label Unknown
    std::vector<std::string> lift_levels;           // parallel to `lifts`
    std::vector<TimeSpan> kvlu_eligible;            // arm vertical at the standing height
    std::vector<double> drift_pa;                   // on the wrist timeline
    int cycles_left = 0;
    int cycles_right = 0;
};

struct SimSession {
    std::vector<WristStream> wrist;  // left, right
    InsoleStream left;
    InsoleStream right;
    GroundTruth truth;
    Anthropometry anthro;
};

SimSession generate_session(const SimConfig& config);

struct DriftTrace {
    std::vector<double> offset_pa;
};

// Adds linear + sinusoidal + seeded random-walk drift to the pressure column.
// The applied offsets are returned for oracle use.
DriftTrace inject_drift(std::vector<WristSample>& samples, const DriftSpec& spec,
                        std::uint64_t seed);

// Writes wrist.csv, insole.csv, truth.csv and manifest.json into `dir`.
std::filesystem::path write_session(const SimSession& s, const SimConfig& cfg,
                                    const std::filesystem::path& dir);

SimConfig config_from_json(const std::string& text);
std::string config_to_json(const SimConfig& cfg);

}  // namespace kvlu::sim
