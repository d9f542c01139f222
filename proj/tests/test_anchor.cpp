#include "helpers.hpp"

#include "kvlu/anchor.hpp"
#include "kvlu/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kvlu;
using namespace kvlu::anchor;

namespace {

gait::GaitCycle cycle(Side foot, double start, double end, double ff0, double ff1)
{
    gait::GaitCycle c;
    c.side = foot;
    c.start = start;
    c.end = end;
    c.foot_flat = IntervalLabel{ff0, ff1, to_interval_side(foot), PhaseLabel::FootFlat};
    return c;
}

const IntervalLabel kStand30{0.0, 30.0, IntervalSide::Both, PhaseLabel::Standing};

}  // namespace

TEST_CASE("angle threshold")
{
    SUBCASE("constant samples")
    {
        const std::vector<double> a(20, 58.5);
        const auto thr = compute_angle_threshold(a);
        CHECK(thr.value == 58.5);
        CHECK(thr.sigma == 0.0);
        CHECK(thr.n == 20);
    }
    SUBCASE("hand arithmetic")
    {
        // {60, 70, 80} replicated four times: same mean and population sigma.
        std::vector<double> a;
        for (int r = 0; r < 4; ++r)
            a.insert(a.end(), {60.0, 70.0, 80.0});
        const auto thr = compute_angle_threshold(a);
        CHECK(thr.mean == doctest::Approx(70.0));
        CHECK(thr.sigma == doctest::Approx(8.1650).epsilon(1e-4));
        CHECK(thr.value == doctest::Approx(70.0 - 3.0 * std::sqrt(200.0 / 3.0)).epsilon(1e-12));
    }
    SUBCASE("cohort default")
    {
        CHECK(AngleThreshold::cohort_default().value == 58.5);
        CHECK(kCohortAngleThresholdDeg == 58.5);
    }
    SUBCASE("too few samples")
    {
        const std::vector<double> a(9, 80.0);
        try {
            compute_angle_threshold(a);
            FAIL("expected TooFewSamples");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::TooFewSamples);
        }
    }
    SUBCASE("shift equivariance and threshold below mean")
    {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> n(85, 4);
        std::uniform_real_distribution<double> shift(-20, 20);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> a(10 + trial % 50);
            for (auto& x : a)
                x = n(rng);
            const double c = shift(rng);
            std::vector<double> b = a;
            for (auto& x : b)
                x += c;
            const auto ta = compute_angle_threshold(a);
            const auto tb = compute_angle_threshold(b);
            CHECK(tb.value == doctest::Approx(ta.value + c).epsilon(1e-12));
            CHECK(ta.value <= ta.mean);
        }
    }
}

TEST_CASE("wrist height from anthropometry")
{
    CHECK(estimate_wrist_height({180.5, 0.495}) == doctest::Approx(89.3475));
    CHECK(estimate_wrist_height({166.9, 0.495}) == doctest::Approx(82.6155));
    CHECK(estimate_wrist_height({200.0, 0.495}) == doctest::Approx(99.0));
    CHECK_THROWS_AS(estimate_wrist_height({-1.0, 0.495}), Error);

    const std::vector<std::pair<double, double>> pairs{{85.0, 170.0}, {90.0, 180.0}, {88.0, 176.0}};
    CHECK(refit_wrist_ratio(pairs) == doctest::Approx(0.5));
}

TEST_CASE("standing anchors")
{
    const Anthropometry anthro{172.0};
    const std::vector<IntervalLabel> standing{kStand30};

    SUBCASE("vertical arm gives one anchor at the midpoint")
    {
        const auto w = testutil::wrist(Side::Left, 10, 300, testutil::constant(101000),
                                       testutil::constant(75));
        const auto p = detect_kvlu_standing(standing, w, AngleThreshold::cohort_default(), anthro);
        REQUIRE(p.size() == 1);
        // Samples span 0..29.9, midpoint 14.95; ties go to the earlier one.
        CHECK(p[0].t == doctest::Approx(14.9));
        CHECK(p[0].source == AnchorSource::Standing);
        CHECK(p[0].wrist_side == Side::Left);
        CHECK(p[0].known_height_cm == doctest::Approx(0.495 * 172.0));
        CHECK(p[0].anchor_pressure_pa == 101000);
    }
    SUBCASE("arm below threshold")
    {
        const auto w = testutil::wrist(Side::Left, 10, 300, testutil::constant(101000),
                                       testutil::constant(40));
        CHECK(detect_kvlu_standing(standing, w, AngleThreshold::cohort_default(), anthro).empty());
    }
    SUBCASE("arm raise splits the run")
    {
        const auto w = testutil::wrist(Side::Right, 10, 300, testutil::constant(101000),
                                       [](double t) { return t >= 10 && t < 15 ? 20.0 : 85.0; });
        const auto p = detect_kvlu_standing(standing, w, AngleThreshold::cohort_default(), anthro);
        REQUIRE(p.size() == 2);
        CHECK(p[0].t < 10.0);
        CHECK(p[1].t >= 15.0);
    }
    SUBCASE("samples outside standing are ignored")
    {
        const std::vector<IntervalLabel> part{{5, 6, IntervalSide::Both, PhaseLabel::Standing},
                                              {6, 20, IntervalSide::Both, PhaseLabel::Walking}};
        const auto w = testutil::wrist(Side::Left, 10, 300, testutil::constant(101000),
                                       testutil::constant(85));
        const auto p = detect_kvlu_standing(part, w, AngleThreshold::cohort_default(), anthro);
        REQUIRE(p.size() == 1);
        CHECK(p[0].t >= 5.0);
        CHECK(p[0].t < 6.0);
    }
}

TEST_CASE("walking anchors")
{
    const Anthropometry anthro{172.0};
    const auto thr = AngleThreshold::cohort_default();

    SUBCASE("first or last, nearer the midpoint")
    {
        // Phase [10, 14]; qualifying 10.2..11.6 and 13.0..13.9.
        const auto w = testutil::wrist(Side::Right, 10, 200, testutil::constant(101000),
                                       [](double t) {
                                           const bool on = (t > 10.15 && t < 11.65) ||
                                                           (t > 12.95 && t < 13.95);
                                           return on ? 80.0 : 30.0;
                                       });
        const std::vector<gait::GaitCycle> c{cycle(Side::Left, 9, 15, 10.0, 14.0)};
        const auto p = detect_kvlu_walking(c, w, thr, anthro);
        REQUIRE(p.size() == 1);
        CHECK(p[0].t == doctest::Approx(10.2));
        CHECK(p[0].source == AnchorSource::LF);
        CHECK(p[0].wrist_side == Side::Right);
    }
    SUBCASE("single qualifying sample")
    {
        const auto w = testutil::wrist(Side::Left, 10, 200, testutil::constant(101000),
                                       [](double t) { return std::abs(t - 13.5) < 0.01 ? 80.0 : 0.0; });
        const std::vector<gait::GaitCycle> c{cycle(Side::Right, 9, 15, 10.0, 14.0)};
        const auto p = detect_kvlu_walking(c, w, thr, anthro);
        REQUIRE(p.size() == 1);
        CHECK(p[0].t == doctest::Approx(13.5));
        CHECK(p[0].source == AnchorSource::RF);
    }
    SUBCASE("no qualifying sample")
    {
        const auto w = testutil::wrist(Side::Left, 10, 200, testutil::constant(101000),
                                       testutil::constant(10));
        const std::vector<gait::GaitCycle> c{cycle(Side::Right, 9, 15, 10.0, 14.0)};
        CHECK(detect_kvlu_walking(c, w, thr, anthro).empty());
    }
    SUBCASE("equidistant first and last picks the earlier")
    {
        // Samples every 0.25 s; qualifying 10.25 .. 10.75 inside phase
        // [10, 11), symmetric about the midpoint 10.5.
        const auto w = testutil::wrist(Side::Left, 4, 80, testutil::constant(101000),
                                       [](double t) { return t > 10.1 && t < 10.9 ? 80.0 : 0.0; });
        const std::vector<gait::GaitCycle> c{cycle(Side::Left, 9.5, 11.5, 10.0, 11.0)};
        const auto p = detect_kvlu_walking(c, w, thr, anthro);
        REQUIRE(p.size() == 1);
        CHECK(p[0].t == 10.25);
    }
    SUBCASE("cycle without foot flat")
    {
        gait::GaitCycle c;
        c.side = Side::Left;
        c.start = 0;
        c.end = 1;
        const auto w = testutil::wrist(Side::Left, 10, 20, testutil::constant(101000),
                                       testutil::constant(80));
        CHECK(detect_kvlu_walking(std::vector<gait::GaitCycle>{c}, w, thr, anthro).empty());
    }
}

TEST_CASE("detection rate")
{
    std::vector<gait::GaitCycle> cycles;
    for (int k = 0; k < 10; ++k)
        cycles.push_back(cycle(Side::Left, k, k + 1, k + 0.3, k + 0.6));
    auto point = [](double t, Side wrist, AnchorSource src) {
        return KvluPoint{t, wrist, src, 101000, 85};
    };

    SUBCASE("full coverage")
    {
        std::vector<KvluPoint> p;
        for (int k = 0; k < 10; ++k)
            p.push_back(point(k + 0.4, Side::Right, AnchorSource::LF));
        const auto r = kvlu_detection_rate(cycles, p);
        CHECK(r.at({Side::Left, Side::Right}) == 100.0);
        CHECK(r.at({Side::Left, Side::Left}) == 0.0);
        CHECK_FALSE(r.contains({Side::Right, Side::Right}));
    }
    SUBCASE("eight of ten")
    {
        std::vector<KvluPoint> p;
        for (int k = 0; k < 8; ++k)
            p.push_back(point(k + 0.4, Side::Right, AnchorSource::LF));
        // Second point in an already-covered cycle and a point from the other
        // foot do not count.
        p.push_back(point(0.5, Side::Right, AnchorSource::LF));
        p.push_back(point(9.4, Side::Right, AnchorSource::RF));
        CHECK(kvlu_detection_rate(cycles, p).at({Side::Left, Side::Right}) == 80.0);
    }
    SUBCASE("no cycles")
    {
        try {
            kvlu_detection_rate(std::vector<gait::GaitCycle>{}, std::vector<KvluPoint>{});
            FAIL("expected NoCycles");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NoCycles);
        }
    }
    CHECK(combination_name({Side::Left, Side::Right}) == "LF-RW");
    CHECK(combination_name({Side::Right, Side::Left}) == "RF-LW");
}
