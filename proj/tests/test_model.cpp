#include "helpers.hpp"

#include "kvlu/error.hpp"
#include "kvlu/model.hpp"

#include <doctest.h>

#include <random>

using namespace kvlu;

namespace {

Errc code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected kvlu::Error");
    return Errc::Io;
}

InsoleSample filled(double v)
{
    InsoleSample s;
    s.cells.fill(v);
    return s;
}

}  // namespace

TEST_CASE("region sums")
{
    SUBCASE("all zero")
    {
        const auto s = filled(0.0);
        for (Region r : {Region::Heel, Region::Midfoot, Region::Forefoot, Region::Total})
            CHECK(region_grf(s, r) == 0.0);
    }
    SUBCASE("thirty heel cells at 1 N")
    {
        auto s = filled(0.0);
        int placed = 0;
        for (std::size_t c = 0; c < kInsoleCells && placed < 30; ++c)
            if (default_region_map().at(c) == Region::Heel) {
                s.cells[c] = 1.0;
                ++placed;
            }
        REQUIRE(placed == 30);
        CHECK(region_grf(s, Region::Heel) == 30.0);
        CHECK(region_grf(s, Region::Total) == 30.0);
        CHECK(region_grf(s, Region::Forefoot) == 0.0);
    }
    SUBCASE("uniform half newton")
    {
        CHECK(region_grf(filled(0.5), Region::Total) == 48.0);
    }
    SUBCASE("total is the exact sum of the regions")
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 40.0);
        for (int k = 0; k < 200; ++k) {
            InsoleSample s;
            for (auto& c : s.cells)
                c = u(rng);
            CHECK(region_grf(s, Region::Total) == region_grf(s, Region::Heel) +
                                                       region_grf(s, Region::Midfoot) +
                                                       region_grf(s, Region::Forefoot));
        }
    }
}

TEST_CASE("default region map layout")
{
    const auto& m = default_region_map();
    // 12 rows of 8: rows 0-4 forefoot (centres < 0.4), rows 8-11 heel.
    CHECK(m.count(Region::Forefoot) == 40);
    CHECK(m.count(Region::Heel) == 32);
    CHECK(m.count(Region::Midfoot) == 24);
    CHECK(m.at(0) == Region::Forefoot);
    CHECK(m.at(95) == Region::Heel);
    CHECK(RegionMap::parse(m.serialize()) == m);
    CHECK(code_of([] { RegionMap::parse("H M F"); }) == Errc::InvalidConfig);
}

TEST_CASE("interval algebra")
{
    std::vector<TimeSpan> a{{0, 2}, {1, 3}, {5, 6}};
    const auto n = normalize(a);
    REQUIRE(n.size() == 2);
    CHECK(n[0] == TimeSpan{0, 3});
    CHECK(n[1] == TimeSpan{5, 6});

    const std::vector<TimeSpan> b{{2, 5.5}};
    const auto i = intersect(n, b);
    REQUIRE(i.size() == 2);
    CHECK(i[0] == TimeSpan{2, 3});
    CHECK(i[1] == TimeSpan{5, 5.5});

    const auto d = subtract(n, b);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == TimeSpan{0, 2});
    CHECK(d[1] == TimeSpan{5.5, 6});
    CHECK(total_duration(d) == doctest::Approx(2.5));

    TimeSpan s{1, 2};
    CHECK(s.contains(1.0));
    CHECK_FALSE(s.contains(2.0));
}

TEST_CASE("session validation")
{
    using testutil::constant;
    auto w = testutil::wrist(Side::Left, 10, 50, constant(101000), constant(90));
    auto l = testutil::insole(Side::Left, 40, 200, constant(100), constant(50), constant(100));
    auto r = testutil::insole(Side::Right, 40, 200, constant(100), constant(50), constant(100));
    const Anthropometry anthro{170.0};

    SUBCASE("rates are reported per stream")
    {
        const auto s = validate_session({w}, l, r, anthro);
        REQUIRE(s.stats.size() == 3);
        CHECK(s.stats[0].name == "insole_L");
        CHECK(s.stats[0].rate_hz == doctest::Approx(40));
        CHECK(s.stats[2].name == "wrist_L");
        CHECK(s.stats[2].rate_hz == doctest::Approx(10));
        CHECK(s.warnings.empty());
    }
    SUBCASE("duplicate timestamp dropped with a warning")
    {
        auto dup = w;
        dup.samples.insert(dup.samples.begin() + 3, dup.samples[3]);
        const auto s = validate_session({dup}, l, r, anthro);
        CHECK(s.wrist[0].samples.size() == 50);
        REQUIRE(s.warnings.size() == 1);
        CHECK(s.stats[2].duplicates_dropped == 1);
    }
    SUBCASE("out-of-order insole reports the offending index")
    {
        auto bad = l;
        bad.samples.resize(3);
        bad.samples[0].t = 0;
        bad.samples[1].t = 2;
        bad.samples[2].t = 1;
        try {
            validate_session({w}, bad, r, anthro);
            FAIL("expected NonMonotonicTime");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NonMonotonicTime);
            REQUIRE(e.indices().size() == 1);
            CHECK(e.indices()[0] == 2);
        }
    }
    SUBCASE("idempotent")
    {
        auto dup = w;
        dup.samples.push_back(dup.samples.back());
        const auto once = validate_session({dup}, l, r, anthro);
        const auto twice = validate_session(once.wrist, once.left, once.right, once.anthro);
        CHECK(twice.wrist == once.wrist);
        CHECK(twice.left == once.left);
        CHECK(twice.right == once.right);
        CHECK(twice.warnings.empty());
    }
    SUBCASE("missing pieces")
    {
        CHECK(code_of([&] { validate_session({}, l, r, anthro); }) == Errc::EmptyStream);
        CHECK(code_of([&] { validate_session({w}, std::nullopt, r, anthro); }) == Errc::EmptyStream);
        CHECK(code_of([&] { validate_session({w}, l, r, std::nullopt); }) ==
              Errc::MissingAnthropometry);
    }
    SUBCASE("range checks")
    {
        auto lowp = w;
        lowp.samples[4].pressure_pa = 20000;
        CHECK(code_of([&] { validate_session({lowp}, l, r, anthro); }) == Errc::OutOfRange);
        auto pitch = w;
        pitch.samples[4].pitch_deg = 181;
        CHECK(code_of([&] { validate_session({pitch}, l, r, anthro); }) == Errc::OutOfRange);
        auto neg = l;
        neg.samples[4].cells[3] = -1;
        CHECK(code_of([&] { validate_session({w}, neg, r, anthro); }) == Errc::OutOfRange);
    }
}

TEST_CASE("anthropometry and model constraints")
{
    CHECK(code_of([] { Anthropometry{0.0}.validate(); }) == Errc::InvalidConfig);
    CHECK(code_of([] { Anthropometry{170.0, 1.0}.validate(); }) == Errc::InvalidConfig);
    Anthropometry{170.0}.validate();

    // a = -1 / (rho g) m/Pa, in cm/Pa.
    const double oracle = -100.0 / (1.225 * 9.80665);
    const auto m = PressureHeightModel::hydrostatic();
    CHECK(m.a_cm_per_pa == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(m.a_cm_per_pa == doctest::Approx(-8.324).epsilon(1e-4));
    CHECK(m.b_cm == 0.0);
    CHECK(code_of([] { PressureHeightModel{1.0, 0.0}.validate(); }) == Errc::InvalidConfig);
}

TEST_CASE("enum text round trips")
{
    for (Side s : {Side::Left, Side::Right})
        CHECK(parse_side(side_code(s)) == s);
    for (PhaseLabel l : {PhaseLabel::Swing, PhaseLabel::FootFlat, PhaseLabel::StanceOther,
                         PhaseLabel::Standing, PhaseLabel::Walking, PhaseLabel::Unknown})
        CHECK(parse_phase_label(to_string(l)) == l);
    for (AnchorSource a : {AnchorSource::Standing, AnchorSource::RF, AnchorSource::LF})
        CHECK(parse_anchor_source(to_string(a)) == a);
    CHECK(to_string(Errc::NoAnchor) == "NoAnchor");
}
