#include "suscept/errors.hpp"
#include "suscept/response.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace suscept;

namespace {

UnimodalMap tent(double slope) {
    MapSpec spec;
    spec.family = TentParams{slope};
    return build_map(spec);
}

} // namespace

TEST_CASE("the expansion budget of the perturbed family") {
    const UnimodalMap m = tent(1.9);
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    // sup_deriv is the certified coefficient bound of 1 - 2x over [0, c1],
    // 1 + 2 * 0.95, not the pointwise sup; the budget stays on the safe side
    CHECK(X.sup_deriv == doctest::Approx(2.9));
    CHECK(family_t_max(m, X) == doctest::Approx(0.9 / (1.9 * 2.9 + 1.0)));
    CHECK_THROWS_AS(family_at(m, X, 0.35), ExpansionViolated);
    const Observable phi = make_observable(Expr::parse("x"), 0.0, 1.0, "x");
    CHECK_THROWS_AS(response_fd(m, X, phi, 0.2, 256), ExpansionViolated);
}

TEST_CASE("perturbed maps pin the endpoints and realize f + t X o f exactly") {
    const UnimodalMap m = tent(1.9);
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const double t = 0.1;
    const FamilyAtT fam = family_at(m, X, t);
    CHECK(fam.t_max == doctest::Approx(family_t_max(m, X)));

    CHECK(fam.map.eval(0.0) == 0.0);
    CHECK(fam.map.eval(1.0) == 0.0);
    CHECK(fam.map.c == m.c);

    // the family is linear in t by construction, so subtracting the base map
    // recovers t * X(f(x)) with no truncation error at all
    for (double x : {0.1, 0.3, 0.5, 0.62, 0.97}) {
        const double v = m.eval(x);
        CHECK(fam.map.eval(x) == v + t * X(v));
    }
    // derivative follows the chain rule through the same closures
    CHECK(fam.map.deriv(0.3) ==
          doctest::Approx(m.deriv(0.3) * (1.0 + t * X.deriv(m.eval(0.3)))));
}

TEST_CASE("finite differences expose both stencils and their gap") {
    const UnimodalMap m = tent(2.0);
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const Observable phi = make_observable(Expr::parse("x"), 0.0, 1.0, "x");
    const FdEstimate fd = response_fd(m, X, phi, 1e-3, 1024);
    REQUIRE(fd.means.size() == 4);
    // means are recorded ascending in t and the stencil reproduces them
    CHECK(fd.means[0].first < fd.means[1].first);
    CHECK(fd.means[2].first == -fd.means[1].first);
    const cplx stencil = (-fd.means[3].second + 8.0 * fd.means[2].second -
                          8.0 * fd.means[1].second + fd.means[0].second) /
                         (12.0 * 1e-3);
    CHECK(std::abs(stencil - fd.value) <= 1e-12);
    CHECK(fd.err >= std::abs(fd.value - fd.two_point));
    CHECK(fd.err >= fd.grid_gap);
}

TEST_CASE("closed-form response for the flat tent 2 case is 1/6") {
    // X = x - x^2 vanishes on the postcritical orbit, so the remainder is 0
    // and the whole response sits in the holomorphic correction
    const UnimodalMap m = tent(2.0);
    const UlamOperator op = build_ulam(m, 4096);
    const AcimDensity dens = stationary_density(op);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 4096);
    const SaltusDecomposition saltus = saltus_decomposition(op, dens, m, orbit);
    const SusceptibilityContext ctx{m, orbit, op, saltus};
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const Observable phi = mean_normalize(
        make_observable(Expr::parse("x"), 0.0, 1.0, "x"), op, dens);

    const FormulaValue fv = response_formula(ctx, X, phi);
    CHECK(std::abs(fv.v_at_one) <= 1e-12);
    CHECK(fv.cross_check_gap <= 1e-10);
    CHECK(fv.value.real() == doctest::Approx(1.0 / 6.0).epsilon(5e-3));

    // a perturbation that survives on the orbit is rejected as non-horizontal
    const Perturbation bad = make_perturbation(Expr::parse("x - 0.5*x^2"), m);
    CHECK_THROWS_AS(response_formula(ctx, bad, phi), NotHorizontal);

    // and the observable must arrive mean-normalized
    const Observable raw = make_observable(Expr::parse("x"), 0.0, 1.0, "x");
    CHECK_THROWS_AS(response_formula(ctx, X, raw), MeanNotZero);
}

TEST_CASE("all response routes agree on the flat tent 2 case") {
    const UnimodalMap m = tent(2.0);
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const Observable phi = make_observable(Expr::parse("x"), 0.0, 1.0, "x");

    ResponseConfig cfg;
    cfg.n_cells = 2048;
    cfg.orbit_len = 100000;
    cfg.precritical_depth = 80000;
    cfg.birkhoff_m = 5000;
    cfg.j_lo = 4;
    cfg.j_hi = 11;
    const ResponseReport rep = response_report(m, X, phi, cfg);

    CHECK(rep.formula_available);
    CHECK(rep.horizontality.residuals[0] <= 1e-12);
    CHECK(rep.u_at_one <= 1e-10);
    CHECK(rep.birkhoff.pass);
    CHECK(rep.consistent);
    CHECK(rep.spread <= 0.05);
    CHECK(rep.formula.value.real() == doctest::Approx(1.0 / 6.0).epsilon(5e-3));
    CHECK(rep.nt_inner.value.real() == doctest::Approx(1.0 / 6.0).epsilon(5e-3));
    CHECK(rep.nt_outer.value.real() == doctest::Approx(1.0 / 6.0).epsilon(5e-3));
    CHECK(rep.fd.value.real() == doctest::Approx(1.0 / 6.0).epsilon(0.1));
}
