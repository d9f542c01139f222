#include "kvlu/error.hpp"
#include "kvlu/pipeline.hpp"
#include "kvlu/sim.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace kvlu;
using namespace kvlu::pipeline;

namespace {

const std::map<std::string, double> kLevels{
    {"ground", 0.0}, {"knee", 50.8}, {"waist", 101.6}, {"shoulder", 139.7}};

struct Run {
    sim::SimSession sim;
    ingest::SessionManifest manifest;
    SessionResult result;
};

Run run(const sim::SimConfig& c, PipelineConfig cfg = {})
{
    Run r;
    r.sim = sim::generate_session(c);
    const auto session = validate_session(r.sim.wrist, r.sim.left, r.sim.right, r.sim.anthro);
    r.manifest.subject_id = c.subject_id;
    r.manifest.body_height_cm = c.body_height_cm;
    r.manifest.levels = kLevels;
    r.result = run_session(session, r.manifest, cfg);
    return r;
}

double truth_at(const sim::GroundTruth& g, double t)
{
    for (const auto& s : g.samples)
        if (s.t == t)
            return s.wrist_height_cm;
    FAIL("no truth sample at t");
    return 0;
}

}  // namespace

TEST_CASE("noiseless closure")
{
    auto c = sim::default_protocol(3, 1);
    PipelineConfig cfg;
    cfg.smooth_window = 1;
    const auto r = run(c, cfg);
    REQUIRE(r.result.wrists.size() == 2);
    for (const auto& w : r.result.wrists) {
        REQUIRE(w.realtime);
        REQUIRE(w.corrected);
        CHECK(w.realtime->rejected.empty());
        CHECK(w.realtime->anchors.size() > 10);
        double worst = 0;
        for (const auto* tr : {&*w.realtime, &*w.corrected})
            for (const auto& s : tr->samples)
                worst = std::max(worst, std::abs(s.lvl_cm - truth_at(r.sim.truth, s.t)));
        CHECK(worst <= 1e-9);
    }
    CHECK(r.result.threshold_source == "cohort");
}

TEST_CASE("raw minus corrected recovers an injected linear drift")
{
    sim::SimConfig c;
    c.seed = 6;
    c.drift.linear_pa_per_s = 0.07;
    c.script = {sim::Stand{20}, sim::LiftSet{"knee", 50.8, 2}, sim::Walk{20, sim::Speed::Normal},
                sim::Stand{10}};
    PipelineConfig cfg;
    cfg.smooth_window = 1;
    const auto r = run(c, cfg);
    const double a = cfg.model.a_cm_per_pa;
    for (const auto& w : r.result.wrists) {
        REQUIRE(w.raw);
        REQUIRE(w.corrected);
        const double t0 = w.corrected->anchors.front().t;
        const double t1 = w.corrected->anchors.back().t;
        double worst = 0;
        for (std::size_t i = 0; i < w.corrected->samples.size(); ++i) {
            const auto& s = w.corrected->samples[i];
            if (s.t > t1)
                break;
            const double recovered = w.raw->samples[i].lvl_cm - s.lvl_cm;
            const double injected = a * c.drift.linear_pa_per_s * (s.t - t0);
            worst = std::max(worst, std::abs(recovered - injected));
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("threshold precedence")
{
    sim::SimConfig c;
    c.script = {sim::Stand{20}, sim::Walk{10, sim::Speed::Normal}};
    const auto s = sim::generate_session(c);
    const auto session = validate_session(s.wrist, s.left, s.right, s.anthro);
    ingest::SessionManifest m;
    m.subject_id = "p";
    m.body_height_cm = c.body_height_cm;

    PipelineConfig cfg;
    CHECK(run_session(session, m, cfg).threshold_source == "cohort");

    m.angle_calibration = TimeSpan{0, 10};
    auto r = run_session(session, m, cfg);
    CHECK(r.threshold_source == "calibration");
    CHECK(r.threshold.value == 90.0);  // noiseless vertical arm, sigma 0

    m.angle_threshold_deg = 70.0;
    r = run_session(session, m, cfg);
    CHECK(r.threshold_source == "manifest");
    CHECK(r.threshold.value == 70.0);

    cfg.angle_threshold_deg = 58.5;
    cfg.wrist_ratio = 0.5;
    r = run_session(session, m, cfg);
    CHECK(r.threshold_source == "override");
    CHECK(r.threshold.value == 58.5);
    CHECK(r.anthro.wrist_ratio == 0.5);
    for (const auto& p : r.points)
        CHECK(p.known_height_cm == 0.5 * c.body_height_cm);
}

TEST_CASE("configuration validation")
{
    PipelineConfig cfg;
    cfg.smooth_window = 40;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.smooth_window = 41;
    cfg.wrist_ratio = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.wrist_ratio.reset();
    cfg.model.a_cm_per_pa = 3;
    CHECK_THROWS_AS(cfg.validate(), Error);

    const auto p = PipelineConfig{}.provenance();
    CHECK(p["smooth_window"] == 41);
    CHECK(p["cohort_angle_threshold_deg"] == 58.5);
    CHECK(p["default_wrist_ratio"] == 0.495);
    CHECK(p.contains("max_anchor_jump_cm"));
}

TEST_CASE("speed classes")
{
    CHECK(speed_class(1.6) == "slow");
    CHECK(speed_class(1.1) == "normal");
    CHECK(speed_class(0.85) == "fast");
    CHECK(speed_class(1.35) == "slow");
    CHECK(speed_class(0.975) == "normal");
}

TEST_CASE("session evaluation")
{
    auto c = sim::default_protocol(2, 2);
    PipelineConfig cfg;
    cfg.smooth_window = 1;
    const auto r = run(c, cfg);
    const auto rep = evaluate_session(r.result, r.sim.truth.samples, r.manifest.levels);

    CHECK(rep.subject_id == c.subject_id);
    REQUIRE(rep.accuracy_pct);
    CHECK(*rep.accuracy_pct == doctest::Approx(100.0));
    CHECK(rep.angle_threshold_source == "cohort");

    std::set<std::string> speeds;
    for (const auto& d : rep.detection) {
        speeds.insert(d.speed);
        CHECK(d.cycles > 0);
        CHECK(d.covered <= d.cycles);
    }
    CHECK(speeds == std::set<std::string>{"fast", "normal", "slow"});

    REQUIRE(rep.wrists.size() == 2);
    for (const auto& w : rep.wrists) {
        const auto& m = w.modes.at("corrected");
        REQUIRE(m.wrist);
        CHECK(m.wrist->mae() <= 1e-9);
        REQUIRE(m.levels.size() == 4);
        // The wrist rides above a ground-level load and at a waist-level one.
        CHECK(m.levels.at("ground").me() == doctest::Approx(5.0).epsilon(1e-9));
        CHECK(m.levels.at("knee").me() == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(std::abs(m.levels.at("waist").me()) <= 1e-9);
        CHECK(m.levels.at("shoulder").me() == doctest::Approx(-2.0).epsilon(1e-9));
        REQUIRE(m.lvl);
        CHECK(m.lvl->mae() >= std::abs(m.lvl->me()));
    }
}

TEST_CASE("a session without anchors degrades to warnings")
{
    sim::SimConfig c;
    c.script = {sim::Stand{20}};
    PipelineConfig cfg;
    cfg.angle_threshold_deg = 95.0;  // nothing qualifies
    const auto r = run(c, cfg);
    CHECK(r.result.points.empty());
    for (const auto& w : r.result.wrists) {
        CHECK_FALSE(w.realtime);
        CHECK_FALSE(w.corrected);
    }
    CHECK(r.result.warnings.size() >= 2);
    const auto rep = evaluate_session(r.result, r.sim.truth.samples, r.manifest.levels);
    for (const auto& w : rep.wrists)
        CHECK_FALSE(w.modes.at("corrected").lvl);
}

TEST_CASE("artifact writers")
{
    sim::SimConfig c;
    c.script = {sim::Stand{10}, sim::LiftSet{"waist", 101.6, 1}, sim::Stand{5}};
    const auto r = run(c);
    std::ostringstream pts;
    write_kvlu_points_csv(pts, r.result.points);
    CHECK(pts.str().rfind("t,wrist_side,source,anchor_pressure_pa,known_height_cm\n", 0) == 0);

    std::ostringstream lvl;
    write_lvl_csv(lvl, r.result.wrists[0]);
    const auto text = lvl.str();
    CHECK(text.rfind("t,lvl_cm,anchor_t,mode\n", 0) == 0);
    CHECK(text.find(",realtime\n") != std::string::npos);
    CHECK(text.find(",corrected\n") != std::string::npos);

    std::ostringstream cmp;
    write_trace_compare_csv(cmp, r.result.wrists[0], r.sim.truth.samples);
    std::istringstream in(cmp.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,raw_cm,realtime_cm,corrected_cm,truth_cm");
    std::size_t rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == r.result.wrists[0].realtime->samples.size());
}
