#include "suscept/errors.hpp"
#include "suscept/map.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace suscept;

namespace {

UnimodalMap tent(double slope) {
    MapSpec spec;
    spec.family = TentParams{slope};
    return build_map(spec);
}

UnimodalMap poly(std::vector<double> left, std::vector<double> right,
                 double c = 0.5) {
    MapSpec spec;
    PolyParams p;
    p.left = std::move(left);
    p.right = std::move(right);
    p.c = c;
    spec.family = p;
    return build_map(spec);
}

} // namespace

TEST_CASE("tent slope 2 exposes the exact geometry") {
    const UnimodalMap m = tent(2.0);
    CHECK(m.a == 0.0);
    CHECK(m.b == 1.0);
    CHECK(m.c == 0.5);
    CHECK(m.c1 == 1.0);
    CHECK(m.c2 == 0.0);
    CHECK(m.lambda == 2.0);
    CHECK(m.sup_slope == 2.0);
    CHECK(m.exact_orbit);
    CHECK(m.eval(0.25) == 0.5);
    CHECK(m.eval(0.75) == 0.5);
    CHECK(m.deriv(0.25) == 2.0);
    CHECK(m.deriv(0.75) == -2.0);
    CHECK(m.deriv2(0.3) == 0.0);
}

TEST_CASE("tent slope below 2 traps the orbit strictly inside") {
    const UnimodalMap m = tent(1.9);
    CHECK(m.c1 == doctest::Approx(0.95));
    CHECK(m.c2 == doctest::Approx(1.9 * 0.05));
    CHECK(m.lambda == doctest::Approx(1.9));
    CHECK(m.eval(0.25) == doctest::Approx(0.475));
    CHECK_FALSE(m.exact_orbit);
    CHECK(m.c2 < m.c1);
    CHECK(m.eval(m.c1) == doctest::Approx(m.c2));
}

TEST_CASE("skewed tent takes its expansion from the shallower branch") {
    MapSpec spec;
    spec.family = SkewedTentParams{0.3, 1.0};
    const UnimodalMap m = build_map(spec);
    CHECK(m.c == 0.3);
    CHECK(m.c1 == doctest::Approx(1.0));
    CHECK(m.lambda == doctest::Approx(1.0 / 0.7));
    CHECK(m.sup_slope == doctest::Approx(1.0 / 0.3));
    CHECK(m.eval(0.15) == doctest::Approx(0.5));
    CHECK(m.eval(0.65) == doctest::Approx(0.5));
}

TEST_CASE("polynomial branches validate and report the slope range") {
    // left 1.5x + x^2 rises to 1 at c = 1/2, right 2 - 2x falls back to 0
    const UnimodalMap m = poly({0.0, 1.5, 1.0}, {2.0, -2.0});
    CHECK(m.c1 == doctest::Approx(1.0));
    CHECK(m.c2 == doctest::Approx(0.0));
    CHECK(m.lambda == doctest::Approx(1.5));
    CHECK(m.sup_slope == doctest::Approx(2.5));
    CHECK(m.deriv(0.25) == doctest::Approx(2.0));
    CHECK(m.deriv2(0.25) == doctest::Approx(2.0));
}

TEST_CASE("inadmissible maps are rejected with the specific violation") {
    // family parameters outside their domain fail before map assembly
    CHECK_THROWS_AS(tent(0.9), ConfigError);
    // left branch leaves the endpoint fixed only when its constant term is 0
    CHECK_THROWS_AS(poly({0.1, 2.0}, {2.1, -2.0}), EndpointViolated);
    // branch values disagree at the turning point
    CHECK_THROWS_AS(poly({0.0, 2.0}, {1.7, -1.5}), DiscontinuousAtC);
    // right branch slope -0.5 at the turning point, endpoints all consistent
    CHECK_THROWS_AS(poly({0.0, 1.5, 1.0}, {0.5, 2.5, -3.0}), ExpansionViolated);
}

TEST_CASE("per-branch callables rebuild a map and see one-sided slopes") {
    const UnimodalMap base = tent(1.9);
    const BranchFns left{[](double x) { return 1.9 * x; },
                         [](double) { return 1.9; }, [](double) { return 0.0; }};
    const BranchFns right{[](double x) { return 1.9 * (1.0 - x); },
                          [](double) { return -1.9; },
                          [](double) { return 0.0; }};
    const UnimodalMap m =
        build_map_from_callables(0.0, 1.0, 0.5, left, right, base.spec);
    CHECK(m.lambda == doctest::Approx(1.9));
    CHECK(m.c1 == doctest::Approx(0.95));
    for (double x : {0.1, 0.5, 0.8})
        CHECK(m.eval(x) == doctest::Approx(base.eval(x)));

    // the right branch is validated through its own derivative callable, so a
    // pair whose right slope turns positive at the turning point is rejected
    // even though the glued piecewise map would route x = c to the left branch
    const BranchFns bad_right{right.f,
                              [](double x) { return x < 0.5 ? -1.9 : 1.9; },
                              [](double) { return 0.0; }};
    CHECK_THROWS_AS(
        build_map_from_callables(0.0, 1.0, 0.5, left, bad_right, base.spec),
        ExpansionViolated);
}

TEST_CASE("postcritical orbit of tent 2 collapses onto the fixed point") {
    const UnimodalMap m = tent(2.0);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 64);
    REQUIRE(orbit.size() == 64);
    CHECK(orbit.c(1) == 1.0);
    CHECK(orbit.c(2) == 0.0);
    CHECK(orbit.c(3) == 0.0);
    CHECK(orbit.slope(1) == -2.0);
    CHECK(orbit.slope(2) == 2.0);
    CHECK(orbit.D(0) == 1.0);
    CHECK(orbit.D(1) == -2.0);
    CHECK(orbit.D(2) == -4.0);
    REQUIRE(orbit.preperiod.has_value());
    CHECK(orbit.preperiod->preperiod == 2);
    CHECK(orbit.preperiod->period == 1);
    CHECK(orbit.preperiod->proven);
}

TEST_CASE("tent sqrt(2) orbit is detected as eventually fixed, not proven") {
    // c_3 = 2 - sqrt(2) is a fixed point, reached after two steps
    const UnimodalMap m = tent(std::sqrt(2.0));
    const PostcriticalOrbit orbit = postcritical_orbit(m, 256);
    REQUIRE(orbit.preperiod.has_value());
    CHECK(orbit.preperiod->preperiod == 3);
    CHECK(orbit.preperiod->period == 1);
    CHECK_FALSE(orbit.preperiod->proven);
    CHECK(orbit.c(3) == doctest::Approx(2.0 - std::sqrt(2.0)));
}

TEST_CASE("long derivative products saturate while slopes stay usable") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 3000);
    CHECK(std::isinf(orbit.D(2500)));
    CHECK(std::abs(orbit.slope(2500)) == doctest::Approx(1.9));
    CHECK(std::abs(orbit.D(20)) ==
          doctest::Approx(std::pow(1.9, 20)).epsilon(1e-12));
}

TEST_CASE("preimages collapse the duplicate at the turning point") {
    const UnimodalMap m = tent(2.0);
    const std::vector<double> two = preimages(m, 0.5);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == doctest::Approx(0.25));
    CHECK(two[1] == doctest::Approx(0.75));
    const std::vector<double> one = preimages(m, 1.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(0.5));
    // below the trapping interval both candidate preimages are filtered
    CHECK(preimages(tent(1.9), 0.05).empty());
}

TEST_CASE("backward orbits follow the requested branch bits") {
    const UnimodalMap m = tent(2.0);
    const std::vector<std::uint8_t> bits(7, 0);
    const PrecriticalOrbit pre = precritical_orbit(m, bits, 8);
    REQUIRE(pre.depth() == 8);
    CHECK(pre.y(-1) == 0.5);
    CHECK(pre.y(-2) == doctest::Approx(0.25));
    CHECK(pre.y(-4) == doctest::Approx(0.0625));
    CHECK(m.eval(pre.y(-2)) == doctest::Approx(pre.y(-1)));
    CHECK(m.eval(pre.y(-5)) == doctest::Approx(pre.y(-4)));
}

TEST_CASE("backward orbit stops when the chosen branch leaves the trap") {
    // for slope 1.9 the all-left chain halves below c2 = 0.095 within 4 steps
    const UnimodalMap m = tent(1.9);
    const std::vector<std::uint8_t> bits(7, 0);
    CHECK_THROWS_AS(precritical_orbit(m, bits, 8), BranchUnavailable);
}

TEST_CASE("affine branch inversion uses the closed form") {
    const UnimodalMap m = tent(2.0);
    CHECK(m.left.affine);
    CHECK(m.right.affine);
    CHECK(m.left.invert(0.7) == doctest::Approx(0.35));
    CHECK(m.right.invert(0.7) == doctest::Approx(0.65));
}
