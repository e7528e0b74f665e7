#include "suscept/series.hpp"

#include "suscept/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace suscept {

namespace {

struct KahanSum {
    cplx sum{0.0, 0.0};
    cplx comp{0.0, 0.0};

    void add(cplx x) {
        const cplx y = x - comp;
        const cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// Smallest K in [lo, hi] with tail(K) <= tol, assuming tail is
// nonincreasing in K; returns hi + 1 when even tail(hi) misses.
template <class Tail>
std::size_t smallest_index(Tail tail, double tol, std::size_t lo, std::size_t hi) {
    if (tail(lo) <= tol) return lo;
    if (tail(hi) > tol) return hi + 1;
    std::size_t bad = lo, good = hi;
    while (good - bad > 1) {
        const std::size_t mid = bad + (good - bad) / 2;
        (tail(mid) <= tol ? good : bad) = mid;
    }
    return good;
}

double rising_factorial(std::size_t j, int d) {
    double r = 1.0;
    for (int t = 0; t < d; ++t) r *= static_cast<double>(j + static_cast<std::size_t>(t));
    return r;
}

double falling_factorial(std::size_t n, int d) {
    double r = 1.0;
    for (int t = 0; t < d; ++t) {
        if (n < static_cast<std::size_t>(t)) return 0.0;
        r *= static_cast<double>(n - static_cast<std::size_t>(t));
    }
    return r;
}

} // namespace

double geom_poly_tail(double sup, double r, std::size_t K, int d) {
    sup = std::abs(sup);
    if (sup == 0.0) return 0.0;
    if (!(r >= 0.0) || r >= 1.0)
        return std::numeric_limits<double>::infinity();
    if (r == 0.0) return K == 0 && d == 0 ? sup : 0.0;
    if (d < 0 || d > 3) throw ConfigError("geom_poly_tail supports weights k^d with 0 <= d <= 3");

    const double om = 1.0 - r;
    const double m0 = 1.0 / om;
    const double m1 = r / (om * om);
    const double m2 = r * (1.0 + r) / (om * om * om);
    const double m3 = r * (1.0 + 4.0 * r + r * r) / (om * om * om * om);
    const double k = static_cast<double>(K);

    double moments = 0.0;
    switch (d) {
    case 0: moments = m0; break;
    case 1: moments = k * m0 + m1; break;
    case 2: moments = k * k * m0 + 2.0 * k * m1 + m2; break;
    case 3: moments = k * k * k * m0 + 3.0 * k * k * m1 + 3.0 * k * m2 + m3; break;
    }
    return sup * std::pow(r, k) * moments;
}

RotationStream::RotationStream(double omega) : rot_(std::polar(1.0, omega)) {}

cplx RotationStream::next() {
    const cplx out = w_;
    w_ *= rot_;
    if (++count_ % 4096u == 0) w_ /= std::abs(w_);
    return out;
}

std::vector<cplx> rotated_sums(const PostcriticalOrbit& orbit,
                               const Observable& phi, double omega,
                               std::size_t m) {
    if (orbit.points.size() < m) throw OrbitTooShort(orbit.points.size(), m);
    std::vector<cplx> out;
    out.reserve(m);
    RotationStream rot(omega);
    KahanSum acc;
    for (std::size_t j = 0; j < m; ++j) {
        acc.add(rot.next() * phi.f(orbit.points[j]));
        out.push_back(acc.sum);
    }
    return out;
}

SeriesValue sigma_eval(const PostcriticalOrbit& orbit, const Observable& phi,
                       cplx z, SigmaMode mode, double tol, double omega) {
    const double r = mode == SigmaMode::Direct ? std::abs(z)
                                               : std::abs(z * std::polar(1.0, -omega));
    if (r >= 1.0)
        throw OutsideDomain("sigma power series needs |z| < 1, got |z| = " + std::to_string(r));
    if (phi.sup == 0.0) return {0.0, 0.0, 0};

    const std::size_t cap = orbit.points.size();
    SeriesValue out;

    if (mode == SigmaMode::Direct) {
        const auto tail = [&](std::size_t K) { return geom_poly_tail(phi.sup, r, K, 0); };
        const std::size_t K = smallest_index(tail, tol, 1, cap);
        if (K > cap) throw OrbitTooShort(cap, K);
        KahanSum acc;
        cplx zk = 1.0;
        for (std::size_t k = 0; k < K; ++k) {
            acc.add(phi.f(orbit.points[k]) * zk);
            zk *= z;
        }
        out = {acc.sum, tail(K), K};
    } else {
        const cplx zp = z * std::polar(1.0, -omega);
        // |S_k| <= k sup, so the dropped part is |1 - z'| sup sum_{k>K} k r^{k-1}.
        const auto tail = [&](std::size_t K) {
            return std::abs(1.0 - zp) * geom_poly_tail(phi.sup / std::max(r, 1e-300), r, K + 1, 1);
        };
        const std::size_t K = smallest_index(tail, tol, 1, cap);
        if (K > cap) throw OrbitTooShort(cap, K);
        RotationStream rot(omega);
        KahanSum partial; // S_k as k advances
        KahanSum acc;
        cplx zk = 1.0;    // z'^{k-1}
        for (std::size_t k = 1; k <= K; ++k) {
            partial.add(rot.next() * phi.f(orbit.points[k - 1]));
            acc.add(partial.sum * zk);
            zk *= zp;
        }
        out = {(1.0 - zp) * acc.sum, tail(K), K};
    }
    return out;
}

SeriesValue sigma_eval_streamed(const UnimodalMap& map, const Observable& phi,
                                cplx z, double tol, std::size_t max_terms) {
    const double r = std::abs(z);
    if (r >= 1.0)
        throw OutsideDomain("sigma power series needs |z| < 1, got |z| = " + std::to_string(r));
    if (phi.sup == 0.0) return {0.0, 0.0, 0};

    const auto tail = [&](std::size_t K) { return geom_poly_tail(phi.sup, r, K, 0); };
    const std::size_t K = smallest_index(tail, tol, 1, max_terms);
    if (K > max_terms)
        throw TailUnreachable("sigma tail " + std::to_string(tail(max_terms)) +
                              " above tolerance " + std::to_string(tol) + " after " +
                              std::to_string(max_terms) + " terms");
    KahanSum acc;
    cplx zk = 1.0;
    double x = map.c1;
    for (std::size_t k = 0; k < K; ++k) {
        acc.add(phi.f(x) * zk);
        zk *= z;
        x = map.eval(x);
    }
    return {acc.sum, tail(K), K};
}

SeriesValue sigma_deriv_eval(const PostcriticalOrbit& orbit,
                             const Observable& phi, cplx z, int deriv,
                             double tol) {
    if (deriv < 0 || deriv > 3)
        throw ConfigError("sigma derivatives support orders 0 to 3");
    if (deriv == 0) return sigma_eval(orbit, phi, z, SigmaMode::Direct, tol);
    const double r = std::abs(z);
    if (r >= 1.0)
        throw OutsideDomain("sigma power series needs |z| < 1, got |z| = " +
                            std::to_string(r));
    if (phi.sup == 0.0) return {0.0, 0.0, 0};

    // sum_{k >= K} k!/(k-d)! r^{k-d} <= r^{-d} sum k^d r^k
    const double rd = std::pow(r, -deriv);
    const auto tail = [&](std::size_t K) {
        return rd * geom_poly_tail(phi.sup, r, K, deriv);
    };
    const std::size_t cap = orbit.points.size();
    const std::size_t K = smallest_index(tail, tol,
                                         static_cast<std::size_t>(deriv), cap);
    if (K > cap) throw OrbitTooShort(cap, K);
    KahanSum acc;
    cplx zk = 1.0; // z^{k - d}
    for (std::size_t k = static_cast<std::size_t>(deriv); k < K; ++k) {
        acc.add(falling_factorial(k, deriv) * phi.f(orbit.points[k]) * zk);
        zk *= z;
    }
    return {acc.sum, tail(K), K};
}

SeriesValue sigma_outer_eval(const PrecriticalOrbit& pre, const Observable& phi,
                             cplx z, double tol) {
    const double r = 1.0 / std::abs(z);
    if (r >= 1.0)
        throw OutsideDomain("outer sigma needs |z| > 1, got |z| = " + std::to_string(std::abs(z)));
    if (phi.sup == 0.0) return {0.0, 0.0, 0};

    const auto tail = [&](std::size_t M) { return geom_poly_tail(phi.sup, r, M + 1, 0); };
    const std::size_t cap = pre.points.size();
    const std::size_t M = smallest_index(tail, tol, 1, cap);
    if (M > cap) throw OrbitTooShort(cap, M);
    KahanSum acc;
    const cplx zi = 1.0 / z;
    cplx zm = 1.0;
    for (std::size_t m = 1; m <= M; ++m) {
        zm *= zi;
        acc.add(phi.f(pre.y(-static_cast<long>(m))) * zm);
    }
    return {-acc.sum, tail(M), M};
}

cplx RationalSigma::eval(cplx z) const {
    cplx p = 0.0, zk = 1.0;
    for (const cplx& a : head) {
        p += a * zk;
        zk *= z;
    }
    // zk is now z^{m-1}
    cplx q = 0.0;
    cplx zq = zk;
    for (const cplx& a : cycle) {
        q += a * zq;
        zq *= z;
    }
    return p + q / (1.0 - std::pow(z, static_cast<double>(period)));
}

cplx RationalSigma::coefficient(std::size_t k) const {
    if (k + 2 <= preperiod) return head[k];
    return cycle[(k - (preperiod - 1)) % period];
}

cplx RationalSigma::residue_rational(cplx z0) const {
    cplx q = 0.0;
    cplx zq = std::pow(z0, static_cast<double>(preperiod - 1));
    for (const cplx& a : cycle) {
        q += a * zq;
        zq *= z0;
    }
    return -z0 * q / static_cast<double>(period);
}

cplx RationalSigma::residue_rotation(double omega) const {
    KahanSum acc;
    cplx zq = std::polar(1.0, omega * static_cast<double>(preperiod - 1));
    const cplx step = std::polar(1.0, omega);
    for (const cplx& a : cycle) {
        acc.add(a * zq);
        zq *= step;
    }
    return acc.sum / static_cast<double>(period);
}

RationalSigma rational_sigma(const PostcriticalOrbit& orbit, const Observable& phi) {
    if (!orbit.preperiod)
        throw NotPreperiodic();
    const std::size_t m = orbit.preperiod->preperiod;
    const std::size_t p = orbit.preperiod->period;
    if (orbit.points.size() < m + p - 1) throw OrbitTooShort(orbit.points.size(), m + p - 1);

    RationalSigma out;
    out.preperiod = m;
    out.period = p;
    for (std::size_t k = 0; k + 2 <= m; ++k) out.head.push_back(phi.f(orbit.points[k]));
    for (std::size_t k = m - 1; k <= m + p - 2; ++k) out.cycle.push_back(phi.f(orbit.points[k]));
    return out;
}

SeriesValue alpha_eval(const UnimodalMap& map, const PostcriticalOrbit& orbit,
                       const Perturbation& X, std::size_t ell, cplx z,
                       int deriv, double tol) {
    if (ell == 0) throw ConfigError("alpha_eval indexes orbit points from 1");
    if (deriv < 0 || deriv > 3)
        throw ConfigError("alpha_eval supports derivative orders 0 to 3");
    const double az = std::abs(z);
    const double q = 1.0 / (az * map.lambda);
    if (!(q < 0.999))
        throw OutsideDomain("alpha series needs |z| min|f'| > 1, got " +
                            std::to_string(az * map.lambda));

    const double scale = X.sup / std::pow(az, deriv);
    const auto tail = [&](std::size_t J) {
        return scale * std::pow(q, -static_cast<double>(deriv)) *
               geom_poly_tail(1.0, q, J + static_cast<std::size_t>(deriv) + 1, deriv);
    };
    const std::size_t cap =
        orbit.points.size() > ell ? orbit.points.size() - ell : 0;
    if (cap == 0) throw OrbitTooShort(orbit.points.size(), ell + 1);
    const std::size_t J = smallest_index(tail, tol, 1, cap);
    if (J > cap) throw OrbitTooShort(orbit.points.size(), ell + J);

    const double sign = deriv % 2 == 0 ? 1.0 : -1.0;
    const cplx zd = std::pow(z, static_cast<double>(deriv));
    KahanSum acc;
    cplx u = 1.0; // u_j = 1 / (z^j (f^j)'(c_ell)) built up incrementally
    for (std::size_t j = 1; j <= J; ++j) {
        u /= z * orbit.slopes[ell + j - 2];
        acc.add(X(orbit.points[ell + j - 1]) * rising_factorial(j, deriv) * u);
    }
    return {-sign * acc.sum / zd, tail(J), J};
}

SingularFactors singular_factors(const UnimodalMap& map,
                                 const PostcriticalOrbit& orbit, double s1,
                                 const Perturbation& X, const Observable& phi,
                                 cplx z, double tol) {
    SingularFactors out;

    const SeriesValue a1 = alpha_eval(map, orbit, X, 1, z, 0, tol / (2.0 * std::max(1.0, std::abs(s1))));
    out.prefactor = {s1 * (a1.value - cplx(X(orbit.c(1)), 0.0)),
                     std::abs(s1) * a1.tail, a1.terms};

    // remainder(z) = -s1 sum_j phi(c_j) alpha(c_j, z) / D_{j-1}; the weights
    // 1 / D_{j-1} shrink geometrically, so j truncates like a lambda-series.
    const double q = 1.0 / map.lambda;
    const double alpha_bound =
        X.sup * (1.0 / (std::abs(z) * map.lambda)) / (1.0 - 1.0 / (std::abs(z) * map.lambda));
    const double outer_scale = std::abs(s1) * phi.sup * alpha_bound;
    const auto tail = [&](std::size_t J) {
        return outer_scale * geom_poly_tail(1.0, q, J, 0) / q; // sum_{j>J} q^{j-1}
    };
    const std::size_t cap = orbit.points.size();
    const std::size_t J = smallest_index(tail, tol / 2.0, 1, cap);
    if (J > cap) throw OrbitTooShort(cap, J);

    const double inner_tol =
        tol / (4.0 * std::max(1.0, std::abs(s1) * phi.sup * map.lambda / (map.lambda - 1.0)));
    KahanSum acc;
    double tails = 0.0;
    double w = 1.0; // 1 / D_{j-1}
    std::size_t terms = 0;
    for (std::size_t j = 1; j <= J; ++j) {
        if (j > 1) w /= orbit.slopes[j - 2];
        const SeriesValue aj = alpha_eval(map, orbit, X, j, z, 0, inner_tol);
        const cplx pj = phi.f(orbit.points[j - 1]);
        acc.add(pj * aj.value * w);
        tails += std::abs(pj) * aj.tail * std::abs(w);
        terms = std::max(terms, aj.terms);
    }
    out.remainder = {-s1 * acc.sum, tail(J) + std::abs(s1) * tails, J + terms};
    return out;
}

SeriesValue horizontality_sum(const UnimodalMap& map,
                              const PostcriticalOrbit& orbit,
                              const Perturbation& X, int ell, double tol) {
    if (ell < 0 || ell > 3)
        throw ConfigError("horizontality_sum supports orders 0 to 3");
    const double q = 1.0 / map.lambda;
    const auto tail = [&](std::size_t N) {
        return geom_poly_tail(X.sup, q, N + 1, ell);
    };
    const std::size_t cap = orbit.points.size() > 0 ? orbit.points.size() - 1 : 0;
    const std::size_t N = smallest_index(tail, tol, static_cast<std::size_t>(ell) + 1, cap);
    if (N > cap) throw OrbitTooShort(orbit.points.size(), N + 1);

    KahanSum acc;
    double w = 1.0; // 1 / D_n
    for (std::size_t n = 0; n <= N; ++n) {
        if (n > 0) w /= orbit.slopes[n - 1];
        if (n >= static_cast<std::size_t>(ell))
            acc.add(falling_factorial(n, ell) * X(orbit.points[n]) * w);
    }
    return {acc.sum, tail(N), N};
}

Perturbation make_horizontal(const UnimodalMap& map,
                             const PostcriticalOrbit& orbit, const Expr& X0,
                             const std::vector<Expr>& basis, std::size_t order,
                             double tol) {
    if (order == 0 || order > 3)
        throw ConfigError("make_horizontal supports orders 1 to 3");
    if (basis.size() < order)
        throw ConfigError("make_horizontal needs at least `order` basis directions, got " +
                          std::to_string(basis.size()));

    const Perturbation base = make_perturbation(X0, map, "base");
    std::vector<Perturbation> dirs;
    for (std::size_t i = 0; i < order; ++i)
        dirs.push_back(make_perturbation(basis[i], map, "dir" + std::to_string(i)));

    Eigen::MatrixXd A(order, order);
    Eigen::VectorXd rhs(order);
    for (std::size_t l = 0; l < order; ++l) {
        rhs(static_cast<long>(l)) =
            -horizontality_sum(map, orbit, base, static_cast<int>(l), tol * 1e-2).value.real();
        for (std::size_t i = 0; i < order; ++i)
            A(static_cast<long>(l), static_cast<long>(i)) =
                horizontality_sum(map, orbit, dirs[i], static_cast<int>(l), tol * 1e-2).value.real();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) /
                        svd.singularValues()(svd.singularValues().size() - 1);
    if (!(cond < 1e12)) throw SingularSystem(cond);
    const Eigen::VectorXd t = svd.solve(rhs);

    Expr combined = X0;
    for (std::size_t i = 0; i < order; ++i)
        combined = combined + basis[i].scaled(t(static_cast<long>(i)));

    Perturbation out = make_perturbation(combined, map, "horizontalized");
    HorizontalityRecord rec;
    rec.order = order;
    for (std::size_t l = 0; l < order; ++l)
        rec.residuals.push_back(
            std::abs(horizontality_sum(map, orbit, out, static_cast<int>(l), tol * 1e-2).value));
    for (double r : rec.residuals)
        if (!(r <= tol))
            throw NotHorizontal(r);
    out.horizontal = rec;
    return out;
}

namespace {

// Power series of the singular part in the whole open disc: the coefficient
// of z^m is -sum_k s1 X(c_k) phi(c_{k+m}) / D_{k-1} (push-forwards of the
// saltus jump measure), bounded uniformly in m.
SeriesValue singular_coefficient_series(const UnimodalMap& map,
                                        const PostcriticalOrbit& orbit, double s1,
                                        const Perturbation& X,
                                        const Observable& phi, cplx z,
                                        double tol) {
    const double r = std::abs(z);
    if (r > 0.99)
        throw OutsideDomain("coefficient route needs |z| <= 0.99, got " + std::to_string(r));

    const double q = 1.0 / map.lambda;
    const double coeff_bound = std::abs(s1) * X.sup * phi.sup / (1.0 - q);
    const auto inner_tail = [&](std::size_t K) {
        // summed over all m with the |z|^m factor
        return std::abs(s1) * X.sup * phi.sup * geom_poly_tail(1.0, q, K, 0) / (q * (1.0 - r));
    };
    const auto outer_tail = [&](std::size_t M) {
        return geom_poly_tail(coeff_bound, r, M, 0);
    };
    const std::size_t cap = orbit.points.size();
    const std::size_t K = smallest_index(inner_tail, tol / 2.0, 1, cap);
    if (K > cap) throw OrbitTooShort(cap, K);
    const std::size_t M = smallest_index(outer_tail, tol / 2.0, 1, cap);
    if (M > cap || K + M > cap + 1) throw OrbitTooShort(cap, K + M);

    KahanSum total;
    cplx zm = 1.0;
    for (std::size_t m = 0; m < M; ++m) {
        KahanSum coeff;
        double w = 1.0; // 1 / D_{k-1}
        for (std::size_t k = 1; k <= K; ++k) {
            if (k > 1) w /= orbit.slopes[k - 2];
            coeff.add(s1 * X(orbit.points[k - 1]) * phi.f(orbit.points[k + m - 1]) * w);
        }
        total.add(-coeff.sum * zm);
        zm *= z;
    }
    return {total.sum, inner_tail(K) + outer_tail(M), M};
}

} // namespace

SusceptibilityValue susceptibility_eval(const SusceptibilityContext& ctx,
                                        const Perturbation& X,
                                        const Observable& phi, cplx z,
                                        double tol,
                                        const PrecriticalOrbit* outer,
                                        AssemblyRoute route) {
    const double az = std::abs(z);
    if (az == 1.0)
        throw OutsideDomain("susceptibility is evaluated strictly inside or outside the unit circle");

    if (route == AssemblyRoute::Auto)
        route = (az < 1.0 && az * ctx.map.lambda < 1.05) ? AssemblyRoute::Coefficient
                                                         : AssemblyRoute::Factorized;

    SusceptibilityValue out;
    out.route = route;

    if (route == AssemblyRoute::Coefficient) {
        if (az >= 1.0)
            throw OutsideDomain("coefficient route applies only inside the unit disc");
        const SeriesValue s = singular_coefficient_series(ctx.map, ctx.orbit, ctx.saltus.s1,
                                                          X, phi, z, tol / 2.0);
        out.singular_part = s.value;
        out.total.tail = s.tail;
        out.total.terms = s.terms;
    } else {
        if (az * ctx.map.lambda <= 1.02)
            throw OutsideDomain("factorized route needs |z| min|f'| > 1.02; use the coefficient route");
        SeriesValue sig;
        if (az < 1.0) {
            sig = sigma_eval(ctx.orbit, phi, z, SigmaMode::Direct, tol / 4.0);
        } else {
            if (outer == nullptr)
                throw ConfigError("evaluation outside the disc needs a precritical orbit");
            sig = sigma_outer_eval(*outer, phi, z, tol / 4.0);
        }
        const double sf_tol = tol / (4.0 * std::max(1.0, std::abs(sig.value)));
        const SingularFactors sf =
            singular_factors(ctx.map, ctx.orbit, ctx.saltus.s1, X, phi, z, sf_tol);
        out.prefactor = sf.prefactor.value;
        out.sigma = sig.value;
        out.remainder = sf.remainder.value;
        out.singular_part = sf.prefactor.value * sig.value + sf.remainder.value;
        out.total.tail = std::abs(sf.prefactor.value) * sig.tail +
                         std::abs(sig.value) * sf.prefactor.tail +
                         sf.prefactor.tail * sig.tail + sf.remainder.tail;
        out.total.terms = std::max({sig.terms, sf.prefactor.terms, sf.remainder.terms});
    }

    out.hol_part = psi_hol_eval(ctx.op, ctx.saltus, ctx.map, X, phi, z);
    out.total.value = out.singular_part + out.hol_part;
    return out;
}

std::vector<cplx> susceptibility_direct_coeffs(
    const UnimodalMap& map, const UlamOperator& op, const AcimDensity& density,
    const Perturbation& X, const Observable& phi, std::size_t terms,
    std::size_t refine) {
    if (!phi.df)
        throw ConfigError("direct quadrature needs an observable with a derivative");
    if (terms == 0 || terms > 512)
        throw ConfigError("direct quadrature supports 1 to 512 terms");
    if (refine == 0 || refine > 64)
        throw ConfigError("direct quadrature supports 1 to 64 subpanels per cell");

    const std::size_t n = op.n_cells * refine;
    const double h = (op.b - op.a) / static_cast<double>(n);
    std::vector<double> y(n), prod(n, 1.0), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = op.a + h * (static_cast<double>(i) + 0.5);
        y[i] = x;
        w[i] = X(x) * density.rho[i / refine];
    }

    std::vector<cplx> coeffs;
    coeffs.reserve(terms);
    for (std::size_t k = 0; k < terms; ++k) {
        KahanSum ik;
        for (std::size_t i = 0; i < n; ++i)
            ik.add(w[i] * phi.df(y[i]) * prod[i]);
        coeffs.push_back(h * ik.sum);
        for (std::size_t i = 0; i < n; ++i) {
            prod[i] *= map.deriv(y[i]);
            y[i] = map.eval(y[i]);
        }
    }
    return coeffs;
}

SeriesValue susceptibility_direct(const UnimodalMap& map, const UlamOperator& op,
                                  const AcimDensity& density,
                                  const Perturbation& X, const Observable& phi,
                                  cplx z, std::size_t terms,
                                  std::size_t refine) {
    const double r = std::abs(z);
    if (r >= 1.0)
        throw OutsideDomain("direct quadrature oracle applies inside the unit disc only");

    // (f^k)' oscillates at wavelength (b-a) / sup_slope^k; the quadrature is
    // trusted only while that keeps at least 8 panels per wavelength. Beyond
    // that depth the computed integrals decohere, while the true coefficients
    // merely plateau, so truncating there and charging the plateau to the
    // tail is strictly more accurate than summing on.
    const std::size_t n_panels = op.n_cells * refine;
    const std::size_t k_res = static_cast<std::size_t>(std::max(
        1.0, std::floor(std::log(static_cast<double>(n_panels) / 8.0) /
                        std::log(map.sup_slope))));
    const std::size_t used = std::min(terms, k_res + 1);

    const std::vector<cplx> coeffs =
        susceptibility_direct_coeffs(map, op, density, X, phi, used, refine);
    KahanSum acc;
    cplx zk = 1.0;
    double plateau = 0.0;
    for (const cplx& c : coeffs) {
        acc.add(c * zk);
        zk *= z;
        plateau = std::max(plateau, std::abs(c));
    }
    return {acc.sum, geom_poly_tail(plateau, r, used, 0), used};
}

SeriesValue v_at_one_resummed(const UnimodalMap& map,
                              const PostcriticalOrbit& orbit, double s1,
                              const Perturbation& X, const Observable& phi,
                              double tol) {
    // V(1) = sum_j phi(c_j) T_j with T_j = sum_{k >= j} s1 X(c_{k+1}) / D_k;
    // |T_j| <= |s1| sup X lambda^{-j} / (1 - 1/lambda).
    const double q = 1.0 / map.lambda;
    const double tj_scale = std::abs(s1) * X.sup / (1.0 - q);
    const auto outer_tail = [&](std::size_t J) {
        return geom_poly_tail(phi.sup * tj_scale, q, J + 1, 0);
    };
    const std::size_t cap = orbit.points.size() > 1 ? orbit.points.size() - 1 : 0;
    const std::size_t J = smallest_index(outer_tail, tol / 2.0, 1, cap);
    if (J > cap) throw OrbitTooShort(orbit.points.size(), J + 1);
    const auto inner_tail = [&](std::size_t N) {
        // truncating every T_j at k <= N costs at most J phi.sup times the k-tail
        return static_cast<double>(J) * phi.sup *
               geom_poly_tail(std::abs(s1) * X.sup, q, N + 1, 0);
    };
    const std::size_t N = smallest_index(inner_tail, tol / 2.0, J, cap);
    if (N > cap) throw OrbitTooShort(orbit.points.size(), N + 1);

    std::vector<double> w(N + 1); // 1 / D_k for k = 0..N
    w[0] = 1.0;
    for (std::size_t k = 1; k <= N; ++k) w[k] = w[k - 1] / orbit.slopes[k - 1];

    std::vector<double> suffix(N + 2, 0.0); // suffix[j] = sum_{k=j}^{N} s1 X(c_{k+1}) / D_k
    for (std::size_t k = N + 1; k-- > 1;)
        suffix[k] = suffix[k + 1] + s1 * X(orbit.points[k]) * w[k];

    KahanSum acc;
    for (std::size_t j = 1; j <= J; ++j)
        acc.add(phi.f(orbit.points[j - 1]) * suffix[j]);
    return {acc.sum, outer_tail(J) + inner_tail(N), J};
}

} // namespace suscept
