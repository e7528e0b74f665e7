#include "suscept/errors.hpp"
#include "suscept/expr.hpp"
#include "suscept/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace suscept;

TEST_CASE("hash is a pure function of content, not key order") {
    const Scenario a = parse_scenario(
        R"({"map": {"family": "tent", "slope": 1.9}, "observable": "x", "params": {"tol": 1e-8, "cells": 512}})");
    const Scenario b = parse_scenario(
        R"({"params": {"cells": 512, "tol": 1e-8}, "observable": "x", "map": {"slope": 1.9, "family": "tent"}})");
    CHECK(a.canonical == b.canonical);
    CHECK(a.hash == b.hash);

    const Scenario c = parse_scenario(
        R"({"map": {"family": "tent", "slope": 2.0}})");
    CHECK(a.hash != c.hash);
}

TEST_CASE("FNV-1a 64 matches the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("map sections cover the three families and reject the rest") {
    const Scenario tent = parse_scenario(
        R"({"map": {"family": "tent", "slope": 1.7}})");
    REQUIRE(std::holds_alternative<TentParams>(tent.map.family));
    CHECK(std::get<TentParams>(tent.map.family).slope == 1.7);

    const Scenario skewed = parse_scenario(
        R"({"map": {"family": "skewed", "c": 0.3, "h": 0.9, "a": -1.0, "b": 2.0}})");
    REQUIRE(std::holds_alternative<SkewedTentParams>(skewed.map.family));
    CHECK(skewed.map.a == -1.0);
    CHECK(skewed.map.b == 2.0);
    CHECK(std::get<SkewedTentParams>(skewed.map.family).c == 0.3);

    const Scenario poly = parse_scenario(
        R"({"map": {"family": "poly", "left": [0.0, 1.5, 1.0], "right": [2.0, -2.0]}})");
    REQUIRE(std::holds_alternative<PolyParams>(poly.map.family));
    CHECK(std::get<PolyParams>(poly.map.family).left.size() == 3);

    CHECK_THROWS_AS(parse_scenario(R"({"map": {"family": "logistic"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"observable": "x"})"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("not json at all"), ConfigError);
    CHECK_THROWS_AS(
        parse_scenario(R"({"map": {"family": "poly", "left": [0.0, 2.0]}})"),
        ConfigError);
}

TEST_CASE("parameter lookups walk dotted paths with typed fallbacks") {
    const Scenario sc = parse_scenario(
        R"({"map": {"family": "tent"}, "params": {"tol": 1e-6, "radii": [0.5, 0.9], "weight": "pole", "grid": {"cells": 256}}})");
    CHECK(scenario_has(sc, "params.tol"));
    CHECK_FALSE(scenario_has(sc, "params.missing"));
    CHECK(scenario_num(sc, "params.tol", 1.0) == 1e-6);
    CHECK(scenario_num(sc, "params.missing", 42.0) == 42.0);
    CHECK(scenario_num(sc, "params.grid.cells", 0.0) == 256.0);
    CHECK(scenario_str(sc, "params.weight", "none") == "pole");
    const std::vector<double> radii = scenario_nums(sc, "params.radii", {});
    REQUIRE(radii.size() == 2);
    CHECK(radii[1] == 0.9);
    // present but wrong shape is an error, not a silent fallback
    CHECK_THROWS_AS(scenario_num(sc, "params.weight", 0.0), ConfigError);
    CHECK_THROWS_AS(scenario_nums(sc, "params.tol", {}), ConfigError);
}

TEST_CASE("overrides mutate the tree and re-canonicalize the hash") {
    Scenario sc = parse_scenario(
        R"({"map": {"family": "tent", "slope": 1.9}, "params": {"tol": 1e-8}})");
    const std::uint64_t before = sc.hash;
    apply_overrides(sc, "params.tol=1e-6,params.cells=512,params.tag=abel");
    CHECK(sc.hash != before);
    CHECK(scenario_num(sc, "params.tol", 0.0) == 1e-6);
    CHECK(scenario_num(sc, "params.cells", 0.0) == 512.0);
    CHECK(scenario_str(sc, "params.tag", "") == "abel");

    // overriding back restores the original digest
    apply_overrides(sc, "params.tol=1e-8");
    Scenario twin = parse_scenario(sc.canonical);
    CHECK(twin.hash == sc.hash);
}

TEST_CASE("expression grammar evaluates sums of monomials and waves") {
    const Expr poly = Expr::parse("x - x^2");
    CHECK(poly(0.3) == doctest::Approx(0.21));
    CHECK(Expr::parse("2*x^3 - 0.5")(0.5) == doctest::Approx(-0.25));
    CHECK(Expr::parse("sin(pi*x)")(0.5) == doctest::Approx(1.0));
    CHECK(Expr::parse("cos(2*x - 1)")(0.5) == doctest::Approx(1.0));
    CHECK(Expr::parse("0")(0.7) == 0.0);
    CHECK(Expr::constant(3.5)(0.1) == 3.5);
}

TEST_CASE("the grammar rejects products, quotients and stray syntax") {
    CHECK_THROWS_AS(Expr::parse("x*(1 - x)"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("1/2"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("x**2"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("tan(x)"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("x^-1"), ConfigError);
}

TEST_CASE("derivatives are exact term by term") {
    const Expr e = Expr::parse("x^3 - 2*x + sin(2*x)");
    const Expr d = e.derivative();
    for (double x : {0.0, 0.25, 0.7, 1.0}) {
        const double expect = 3.0 * x * x - 2.0 + 2.0 * std::cos(2.0 * x);
        CHECK(d(x) == doctest::Approx(expect).epsilon(1e-14));
    }
    const Expr dd = d.derivative();
    CHECK(dd(0.5) == doctest::Approx(6.0 * 0.5 - 4.0 * std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("sup bounds dominate dense samples of the expression") {
    for (const char* text : {"x - x^2", "sin(pi*x) - 0.3*x", "x^4 - 2*x^2 + x"}) {
        const Expr e = Expr::parse(text);
        const double bound = e.sup_bound(0.0, 1.0);
        double seen = 0;
        for (int i = 0; i <= 1000; ++i)
            seen = std::max(seen, std::abs(e(i / 1000.0)));
        CHECK(bound >= seen);
    }
}

TEST_CASE("printed expressions re-parse to the same function") {
    for (const char* text : {"x - x^2", "0.5*sin(3*x + 0.2) - x^3", "2 - x"}) {
        const Expr e = Expr::parse(text);
        const Expr round = Expr::parse(e.str());
        for (double x : {0.1, 0.5, 0.9})
            CHECK(round(x) == doctest::Approx(e(x)).epsilon(1e-15));
    }
}

TEST_CASE("expression algebra: sums, scaling and constant shifts") {
    const Expr a = Expr::parse("x^2");
    const Expr b = Expr::parse("sin(x)");
    CHECK((a + b)(0.5) == doctest::Approx(0.25 + std::sin(0.5)));
    CHECK(a.scaled(-2.0)(0.5) == doctest::Approx(-0.5));
    CHECK(a.shifted(1.5)(0.5) == doctest::Approx(1.75));
}
