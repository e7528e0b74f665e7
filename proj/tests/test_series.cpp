#include "suscept/errors.hpp"
#include "suscept/series.hpp"

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

Observable obs(const char* text, const UnimodalMap& m) {
    return make_observable(Expr::parse(text), m.a, m.b, text);
}

// reference for alpha: explicit product of slopes, usable while the
// truncation stays well below the saturation depth
cplx alpha_brute(const PostcriticalOrbit& orbit, const Perturbation& X,
                 std::size_t ell, cplx z, std::size_t terms) {
    cplx sum = 0;
    double prod = 1;
    cplx zj = 1;
    for (std::size_t j = 1; j <= terms; ++j) {
        prod *= orbit.slope(ell + j - 1);
        zj *= z;
        sum += X(orbit.c(ell + j)) / (zj * prod);
    }
    return -sum;
}

} // namespace

TEST_CASE("closed-form tails match the summed series and certify from above") {
    const double r = 0.7;
    for (int d = 0; d <= 3; ++d) {
        const std::size_t K = 25;
        double brute = 0;
        for (std::size_t k = K; k < K + 4000; ++k)
            brute += std::pow(static_cast<double>(k), d) * std::pow(r, k);
        const double closed = geom_poly_tail(2.0, r, K, d);
        CHECK(closed == doctest::Approx(2.0 * brute).epsilon(1e-9));
        CHECK(closed >= 2.0 * brute * (1.0 - 1e-12));
    }
    CHECK(geom_poly_tail(1.0, 0.0, 5, 0) == 0.0);
    CHECK(std::isinf(geom_poly_tail(1.0, 1.0, 5, 0)));
    CHECK_THROWS_AS(geom_poly_tail(1.0, 0.5, 5, 4), ConfigError);
}

TEST_CASE("rotation stream reproduces the exact powers") {
    RotationStream stream(0.73);
    for (int k = 0; k < 200; ++k) {
        const cplx expect = std::polar(1.0, 0.73 * k);
        CHECK(std::abs(stream.next() - expect) <= 1e-13);
    }
}

TEST_CASE("rotated partial sums start from the orbit head") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 64);
    const Observable phi = obs("x", m);
    const double omega = 0.4;
    const std::vector<cplx> sums = rotated_sums(orbit, phi, omega, 8);
    REQUIRE(sums.size() == 8);
    CHECK(std::abs(sums[0] - phi(orbit.c(1))) <= 1e-15);
    const cplx s2 = phi(orbit.c(1)) + std::polar(1.0, omega) * phi(orbit.c(2));
    CHECK(std::abs(sums[1] - s2) <= 1e-14);
}

TEST_CASE("tent 2 sigma is the constant 1 for the identity observable") {
    const UnimodalMap m = tent(2.0);
    // the truncation certificate at |z| = 0.9, tol 1e-10 needs ~240 terms
    const PostcriticalOrbit orbit = postcritical_orbit(m, 512);
    const Observable phi = obs("x", m);
    for (cplx z : {cplx(0.3, 0.2), cplx(-0.7, 0.0), cplx(0.0, 0.9)}) {
        const SeriesValue direct = sigma_eval(orbit, phi, z, SigmaMode::Direct);
        CHECK(std::abs(direct.value - 1.0) <= direct.tail + 1e-12);
    }
    const SeriesValue abel =
        sigma_eval(orbit, phi, 0.8 * std::polar(1.0, 0.5), SigmaMode::Abel,
                   1e-10, 0.5);
    CHECK(std::abs(abel.value - 1.0) <= abel.tail + 1e-9);
}

TEST_CASE("direct and Abel summation agree within their certified tails") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 4096);
    const Observable phi = obs("sin(pi*x)", m);
    const double omega = 0.7;
    const cplx z = 0.9 * std::polar(1.0, omega);
    const SeriesValue a = sigma_eval(orbit, phi, z, SigmaMode::Direct, 1e-9);
    const SeriesValue b = sigma_eval(orbit, phi, z, SigmaMode::Abel, 1e-9, omega);
    CHECK(std::abs(a.value - b.value) <= a.tail + b.tail + 1e-11);
}

TEST_CASE("streamed evaluation matches the stored-orbit evaluation") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 2048);
    const Observable phi = obs("sin(pi*x)", m);
    const cplx z(0.5, 0.6);
    const SeriesValue stored = sigma_eval(orbit, phi, z, SigmaMode::Direct, 1e-10);
    const SeriesValue streamed = sigma_eval_streamed(m, phi, z, 1e-10, 100000);
    CHECK(std::abs(stored.value - streamed.value) <=
          stored.tail + streamed.tail + 1e-12);
}

TEST_CASE("series derivative against a finite-difference probe") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 4096);
    const Observable phi = obs("sin(pi*x)", m);

    const cplx z(0.5, 0.0);
    const double h = 1e-6;
    const cplx fd = (sigma_eval(orbit, phi, z + h, SigmaMode::Direct, 1e-13).value -
                     sigma_eval(orbit, phi, z - h, SigmaMode::Direct, 1e-13).value) /
                    (2.0 * h);
    const SeriesValue d1 = sigma_deriv_eval(orbit, phi, z, 1, 1e-12);
    CHECK(std::abs(d1.value - fd) <= 1e-8);

    // the constant tent-2 series has vanishing derivatives of every order
    const PostcriticalOrbit flat = postcritical_orbit(tent(2.0), 64);
    const Observable ido = obs("x", tent(2.0));
    CHECK(std::abs(sigma_deriv_eval(flat, ido, z, 1).value) <= 1e-12);
    CHECK(std::abs(sigma_deriv_eval(flat, ido, z, 2).value) <= 1e-12);
}

TEST_CASE("outer continuation sums the backward orbit geometrically") {
    // all-left pull-backs of tent 2 give y_{-m} = 2^{-m}, so the outer series
    // is -sum (2z)^{-m} = -1/(2z - 1)
    const UnimodalMap m = tent(2.0);
    const std::vector<std::uint8_t> bits(199, 0);
    const PrecriticalOrbit pre = precritical_orbit(m, bits, 200);
    const Observable phi = obs("x", m);
    const SeriesValue at2 = sigma_outer_eval(pre, phi, cplx(2.0, 0.0), 1e-12);
    CHECK(std::abs(at2.value - cplx(-1.0 / 3.0, 0.0)) <= at2.tail + 1e-12);
    const SeriesValue at15 = sigma_outer_eval(pre, phi, cplx(1.5, 0.0), 1e-12);
    CHECK(std::abs(at15.value - cplx(-0.5, 0.0)) <= at15.tail + 1e-12);
}

TEST_CASE("rational form of a detected eventually-fixed orbit") {
    const UnimodalMap m = tent(std::sqrt(2.0));
    const PostcriticalOrbit orbit = postcritical_orbit(m, 512);
    const Observable phi = obs("x", m);
    const RationalSigma rat = rational_sigma(orbit, phi);
    CHECK(rat.preperiod == 3);
    CHECK(rat.period == 1);

    // Taylor coefficients reproduce the orbit values
    for (std::size_t k = 0; k < 30; ++k)
        CHECK(std::abs(rat.coefficient(k) - phi(orbit.c(k + 1))) <= 1e-14);

    // closed form vs truncated summation inside the disc
    const cplx z(0.4, 0.1);
    const SeriesValue direct = sigma_eval(orbit, phi, z, SigmaMode::Direct, 1e-13);
    CHECK(std::abs(rat.eval(z) - direct.value) <= direct.tail + 1e-11);

    // simple pole at z = 1: residue -Q(1)/p and the matching (1-z) blow-up
    const double c3 = 2.0 - std::sqrt(2.0);
    CHECK(std::abs(rat.residue_rational(cplx(1.0, 0.0)) - cplx(-c3, 0.0)) <= 1e-12);
    CHECK(std::abs(rat.residue_rotation(0.0) - cplx(c3, 0.0)) <= 1e-12);
    const cplx near(1.0 - 1e-8, 0.0);
    CHECK(std::abs((1.0 - near) * rat.eval(near) - cplx(c3, 0.0)) <= 1e-6);

    const PostcriticalOrbit generic = postcritical_orbit(tent(1.9), 512);
    CHECK_THROWS_AS(rational_sigma(generic, phi), NotPreperiodic);
}

TEST_CASE("alpha transform against the explicit slope-product sum") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 4096);
    const Perturbation X = make_perturbation(Expr::parse("x - 0.5*x^2"), m);

    for (std::size_t ell : {std::size_t{1}, std::size_t{3}}) {
        for (cplx z : {cplx(1.0, 0.0), cplx(0.9, 0.3)}) {
            const SeriesValue a = alpha_eval(m, orbit, X, ell, z, 0, 1e-12);
            const cplx brute = alpha_brute(orbit, X, ell, z, 120);
            CHECK(std::abs(a.value - brute) <= a.tail + 1e-11);
        }
    }

    // derivative in z against a finite-difference probe at z = 1
    const double h = 1e-6;
    const cplx fd = (alpha_eval(m, orbit, X, 1, cplx(1.0 + h, 0.0), 0, 1e-13).value -
                     alpha_eval(m, orbit, X, 1, cplx(1.0 - h, 0.0), 0, 1e-13).value) /
                    (2.0 * h);
    const SeriesValue d1 = alpha_eval(m, orbit, X, 1, cplx(1.0, 0.0), 1, 1e-12);
    CHECK(std::abs(d1.value - fd) <= 1e-7);
}

TEST_CASE("horizontality correction drives the weighted orbit sum to zero") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 4096);

    const Perturbation generic = make_perturbation(Expr::parse("x"), m);
    CHECK(std::abs(horizontality_sum(m, orbit, generic, 0).value) > 1e-3);

    const Perturbation X = make_horizontal(
        m, orbit, Expr::parse("x - x^2"),
        {Expr::parse("x^2 - x^3"), Expr::parse("x^3 - x^4")}, 1);
    REQUIRE(X.horizontal.has_value());
    CHECK(X.horizontal->order == 1);
    REQUIRE(X.horizontal->residuals.size() == 1);
    CHECK(X.horizontal->residuals[0] <= 1e-10);
    CHECK(std::abs(horizontality_sum(m, orbit, X, 0).value) <= 1e-9);
}

TEST_CASE("singular addends vanish against orbits the perturbation kills") {
    // tent 2: X(c_k) = 0 for every k >= 2, so alpha(c_ell, z) = 0 and the
    // prefactor collapses to -s1 X(c_1)
    const UnimodalMap m = tent(2.0);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 128);
    const Observable phi = obs("x", m);
    const Perturbation X = make_perturbation(Expr::parse("x - 0.5*x^2"), m);
    const double s1 = -1.0;
    for (cplx z : {cplx(1.0, 0.0), cplx(0.7, 0.3)}) {
        const SingularFactors sf = singular_factors(m, orbit, s1, X, phi, z);
        CHECK(std::abs(sf.prefactor.value - cplx(0.5, 0.0)) <= 1e-13);
        CHECK(std::abs(sf.remainder.value) <= 1e-13);
    }

    const Perturbation Xh = make_perturbation(Expr::parse("x - x^2"), m);
    const SeriesValue v = v_at_one_resummed(m, orbit, s1, Xh, phi);
    CHECK(std::abs(v.value) <= 1e-13);
}

TEST_CASE("resummed remainder agrees with the factorized remainder at 1") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 4096);
    const Observable phi = obs("sin(pi*x)", m);
    const Perturbation X = make_horizontal(
        m, orbit, Expr::parse("x - x^2"),
        {Expr::parse("x^2 - x^3"), Expr::parse("x^3 - x^4")}, 1);
    const double s1 = -0.5; // any nonzero scale: both routes carry it linearly
    const SingularFactors sf =
        singular_factors(m, orbit, s1, X, phi, cplx(1.0, 0.0), 1e-10);
    const SeriesValue v2 = v_at_one_resummed(m, orbit, s1, X, phi, 1e-10);
    CHECK(std::abs(sf.remainder.value - v2.value) <= 1e-8);
}

TEST_CASE("assembled susceptibility is the constant 1/6 for the flat case") {
    const UnimodalMap m = tent(2.0);
    const UlamOperator op = build_ulam(m, 4096);
    const AcimDensity dens = stationary_density(op);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 256);
    const SaltusDecomposition sal = saltus_decomposition(op, dens, m, orbit);
    const SusceptibilityContext ctx{m, orbit, op, sal};
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const Observable phi = obs("x", m);

    const SusceptibilityValue low = susceptibility_eval(ctx, X, phi, cplx(0.0, 0.0));
    CHECK(low.route == AssemblyRoute::Coefficient);
    CHECK(low.total.value.real() == doctest::Approx(1.0 / 6.0).epsilon(1e-3));

    const SusceptibilityValue mid = susceptibility_eval(ctx, X, phi, cplx(0.6, 0.0));
    CHECK(mid.route == AssemblyRoute::Factorized);
    CHECK(mid.total.value.real() == doctest::Approx(1.0 / 6.0).epsilon(1e-3));
    CHECK(std::abs(mid.total.value.imag()) <= 1e-3);

    // exactly on the circle is never allowed
    CHECK_THROWS_AS(susceptibility_eval(ctx, X, phi, std::polar(1.0, 0.3)),
                    OutsideDomain);
    // outside the circle the backward-orbit continuation must be supplied
    CHECK_THROWS_AS(susceptibility_eval(ctx, X, phi, cplx(1.02, 0.0)),
                    ConfigError);
    // with it, the flat case continues to the same constant: the singular
    // prefactor vanishes identically, so no jump separates the two sides
    const std::vector<std::uint8_t> bits(499, 0);
    const PrecriticalOrbit pre = precritical_orbit(m, bits, 500);
    const SusceptibilityValue outv =
        susceptibility_eval(ctx, X, phi, cplx(1.2, 0.0), 1e-8, &pre);
    CHECK(outv.route == AssemblyRoute::Factorized);
    CHECK(outv.total.value.real() == doctest::Approx(1.0 / 6.0).epsilon(1e-3));
    CHECK(std::abs(outv.total.value.imag()) <= 1e-3);
}

TEST_CASE("quadrature coefficients for the flat case freeze to 1/6 and 0") {
    const UnimodalMap m = tent(2.0);
    const UlamOperator op = build_ulam(m, 2048);
    const AcimDensity dens = stationary_density(op);
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const Observable phi = make_observable(Expr::parse("x"), 0.0, 1.0, "x");
    const std::vector<cplx> coeffs =
        susceptibility_direct_coeffs(m, op, dens, X, phi, 4, 4);
    REQUIRE(coeffs.size() == 4);
    CHECK(coeffs[0].real() == doctest::Approx(1.0 / 6.0).epsilon(1e-5));
    CHECK(std::abs(coeffs[1]) <= 1e-6);
    CHECK(std::abs(coeffs[2]) <= 1e-6);
}

TEST_CASE("a short orbit cannot certify a tight boundary tolerance") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 8);
    const Observable phi = obs("sin(pi*x)", m);
    CHECK_THROWS_AS(
        sigma_eval(orbit, phi, cplx(0.95, 0.0), SigmaMode::Direct, 1e-10),
        OrbitTooShort);
}
