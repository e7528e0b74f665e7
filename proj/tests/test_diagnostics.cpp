#include "suscept/diagnostics.hpp"
#include "suscept/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
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

std::vector<std::size_t> decade_checkpoints(std::size_t m_max) {
    std::vector<std::size_t> ms;
    for (std::size_t base = 10; base <= m_max; base *= 10)
        for (std::size_t mult : {std::size_t{1}, std::size_t{2}, std::size_t{5}})
            if (base * mult <= m_max) ms.push_back(base * mult);
    if (ms.back() != m_max) ms.push_back(m_max);
    return ms;
}

double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

TEST_CASE("sector approach points walk the dyadic radii") {
    SectorSpec sector;
    sector.omega = 0.8;
    sector.j_lo = 3;
    sector.j_hi = 7;
    const std::vector<cplx> pts = sector.points();
    REQUIRE(pts.size() == 5);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double r = 1.0 - std::pow(2.0, -static_cast<double>(i + 3));
        CHECK(std::abs(pts[i]) == doctest::Approx(r).epsilon(1e-14));
        CHECK(std::arg(pts[i]) == doctest::Approx(0.8).epsilon(1e-14));
    }
    CHECK(sector.cs() == doctest::Approx(1.0));
    sector.half_aperture = 1.0;
    CHECK(sector.cs() == doctest::Approx(1.0 / std::cos(1.0)));
}

TEST_CASE("nontangential limit of an entire function hits its boundary value") {
    SectorSpec sector;
    sector.omega = 0.5;
    const Evaluator eval = [](cplx z) { return SeriesValue{z * z, 0.0, 1}; };
    const ScanReport report = nontangential_limit(eval, sector);
    CHECK(report.verdict == "converged");
    CHECK(std::abs(report.limit - std::polar(1.0, 1.0)) <= 2e-4);
    // err is the first-difference estimate; for a function linear in the
    // boundary distance the true error exceeds it by a factor 1 + O(d)
    CHECK(std::abs(report.limit - std::polar(1.0, 1.0)) <= 2.0 * report.err);
}

TEST_CASE("the outer flag sends the evaluator outside the circle") {
    SectorSpec sector;
    sector.omega = 0.0;
    sector.outer = true;
    std::vector<cplx> seen;
    const Evaluator eval = [&seen](cplx z) {
        seen.push_back(z);
        return SeriesValue{1.0 / z, 0.0, 1};
    };
    nontangential_limit(eval, sector);
    REQUIRE_FALSE(seen.empty());
    for (cplx z : seen) CHECK(std::abs(z) > 1.0);
}

TEST_CASE("the pole-factor weight cancels a simple boundary pole exactly") {
    SectorSpec sector;
    sector.omega = 0.3;
    const cplx vertex = std::polar(1.0, 0.3);
    const Evaluator eval = [vertex](cplx z) {
        return SeriesValue{1.0 / (z - vertex), 0.0, 1};
    };
    const ScanReport report =
        nontangential_limit(eval, sector, NtWeight::PoleFactor);
    CHECK(report.verdict == "converged");
    CHECK(std::abs(report.limit - 1.0) <= 1e-10);
}

TEST_CASE("arc integrals separate boundary growth from a convergent series") {
    const std::vector<double> radii = {1 - 1.0 / 4, 1 - 1.0 / 8, 1 - 1.0 / 16,
                                       1 - 1.0 / 32, 1 - 1.0 / 64, 1 - 1.0 / 128,
                                       1 - 1.0 / 256, 1 - 1.0 / 512};
    const Evaluator pole = [](cplx z) {
        return SeriesValue{1.0 / (1.0 - z), 0.0, 1};
    };
    const ScanReport grows = radial_scan(pole, -0.3, 0.3, radii);
    CHECK(grows.verdict == "growth-consistent-with-strong-boundary");

    const Evaluator tame = [](cplx z) {
        return SeriesValue{1.0 / (1.0 - 0.5 * z), 0.0, 1};
    };
    const ScanReport flat = radial_scan(tame, -0.3, 0.3, radii);
    CHECK(flat.verdict == "bounded");
}

TEST_CASE("rotated averages of a matched coboundary decay, and the zero row "
          "flags an uncentered observable") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 100000);
    const double omega = 1.0;
    const Observable phi = make_coboundary(Expr::parse("cos(3*x)"), omega, m);
    const WwReport report =
        wiener_wintner_check(orbit, phi, {omega}, decade_checkpoints(100000));
    REQUIRE(report.per_omega_verdicts.size() == 1);
    CHECK(report.per_omega_verdicts[0] == "decaying");
    CHECK(report.all_decaying);

    const WwReport uncentered = wiener_wintner_check(
        orbit, obs("x", m), {0.0}, decade_checkpoints(10000));
    CHECK(uncentered.per_omega_verdicts[0] == "mean-not-removed");
    CHECK_FALSE(uncentered.all_decaying);
}

TEST_CASE("quadratic-average inequality on random and hand-checked data") {
    // u = (1, 1), n = 2, h = 1: right side 4.5 against |S|^2 = 4
    const std::vector<cplx> ones = {1.0, 1.0};
    CHECK(van_der_corput_slack(ones, 2, 1) == doctest::Approx(0.5));

    std::mt19937_64 rng(99);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 60;
        const std::size_t h = 1 + rng() % (n - 1);
        std::vector<cplx> u(n);
        for (auto& v : u)
            v = cplx(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
        worst = std::min(worst, van_der_corput_slack(u, n, h));
    }
    CHECK(worst >= -1e-9);
}

TEST_CASE("iterated-logarithm ratios track the rotated sums") {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 1000);
    const Observable phi = obs("sin(pi*x)", m);
    const double omega = 1.0;
    const std::vector<std::size_t> ms = {10, 100, 1000};
    const ScanReport report = lil_ratio(orbit, phi, omega, ms);
    REQUIRE(report.samples.size() == 3);

    const std::vector<cplx> sums = rotated_sums(orbit, phi, omega, 1000);
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const double md = static_cast<double>(ms[i]);
        const double expect =
            std::abs(sums[ms[i] - 1]) / std::sqrt(md * std::log(std::log(md)));
        CHECK(report.samples[i].x == doctest::Approx(md));
        CHECK(report.samples[i].value.real() == doctest::Approx(expect));
    }
    // aux carries the running sup, so it never decreases
    for (std::size_t i = 1; i < report.samples.size(); ++i)
        CHECK(report.samples[i].aux >= report.samples[i - 1].aux - 1e-15);
}

TEST_CASE("the square-root majorant stays inside its envelope") {
    std::vector<double> radii;
    for (double e = 2.0; e <= 5.0; e += 0.5)
        radii.push_back(1.0 - std::pow(10.0, -e));
    const ScanReport report = lil_envelope_check(radii);
    CHECK(report.verdict == "envelope-consistent");
    CHECK(report.slope >= -1.6);
    CHECK(report.slope <= -1.4);
    double max_aux = 0;
    for (const auto& s : report.samples) max_aux = std::max(max_aux, s.aux);
    CHECK(max_aux <= 1.0 + 1e-12);
    CHECK(max_aux == doctest::Approx(1.0));
}

TEST_CASE("sector bound fit recovers an exactly saturated constant") {
    const double omega = 0.3;
    const cplx vertex = std::polar(1.0, omega);
    std::vector<std::pair<cplx, cplx>> samples;
    for (int k = 2; k <= 6; ++k) {
        const double d = std::pow(10.0, -k);
        const cplx z = (1.0 - d) * vertex;
        const double ll = std::max(std::log(std::log(1.0 / d)), 0.1);
        samples.emplace_back(z, cplx(3.0 * std::sqrt(ll / d), 0.0));
    }
    const ScanReport report = sector_bound_fit(samples, omega);
    // the fit recovers d = 1 - |z| from z, so d as small as 1e-6 carries a
    // relative rounding error near 1e-10 into the recovered constant
    CHECK(report.limit.real() == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(report.err == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reference series partial sums match a direct fractional-part loop") {
    const double theta = (std::sqrt(5.0) - 1.0) / 2.0;
    const cplx z(0.3, 0.25);
    cplx brute = 0;
    cplx zk = 1;
    for (std::size_t k = 0; k < 50; ++k) {
        const double t = theta * static_cast<double>(k);
        brute += (t - std::floor(t) - 0.5) * zk;
        zk *= z;
    }
    const SeriesValue g = hecke_reference(theta, z, 50);
    CHECK(std::abs(g.value - brute) <= 1e-12);
    CHECK(g.tail == doctest::Approx(geom_poly_tail(0.5, std::abs(z), 50)));
}

TEST_CASE("right-limit continuation identity for the reference series") {
    const double theta = (std::sqrt(5.0) - 1.0) / 2.0;
    for (cplx z : {1.3 * std::polar(1.0, 0.4), cplx(1.9, -0.6)}) {
        const HeckeGap at200 = hecke_rrl_check(theta, z, 200);
        CHECK(at200.gap <= at200.combined_tails);
        const HeckeGap at260 = hecke_rrl_check(theta, z, 260);
        CHECK(at260.gap <= 1e-9);
    }
}

TEST_CASE("rotated partial sums of a coboundary telescope to rounding") {
    const UnimodalMap m = tent(1.9);
    // S_m reads c_1 .. c_m, so the orbit must hold m + 1 points
    const PostcriticalOrbit orbit = postcritical_orbit(m, 5001);
    const Expr psi = Expr::parse("cos(3*x)");
    const auto psi_fn = [psi](double x) { return psi(x); };
    const TelescopingReport report =
        coboundary_telescoping_check(orbit, psi_fn, 0.7, 5000);
    CHECK(report.max_residual <= 1e-12);
}
