#include "suscept/acim.hpp"
#include "suscept/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <vector>

namespace suscept {

namespace {

// Index of the grid cell containing y, clamped to [0, n-1].
std::size_t cell_of(const UlamOperator& op, double y) {
    const double t = (y - op.a) / (op.b - op.a) * static_cast<double>(op.n_cells);
    const long i = static_cast<long>(std::floor(t));
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(op.n_cells) - 1));
}

} // namespace

UlamOperator build_ulam(const UnimodalMap& map, std::size_t n_cells) {
    if (n_cells < 16)
        throw ConfigError("Ulam grid needs at least 16 cells");
    UlamOperator op;
    op.a = map.a;
    op.b = map.b;
    op.n_cells = n_cells;
    const double h = op.h();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n_cells * static_cast<std::size_t>(map.sup_slope + 3));

    // One monotone piece of a column cell: distribute |x-mass| over the image
    // cells by walking the image across grid edges. The x-boundaries are
    // computed once per edge so the column masses telescope exactly.
    auto add_piece = [&](std::size_t col, const Branch& br, double u, double v) {
        if (!(v > u)) return;
        const double yu = br.f(u), yv = br.f(v);
        const bool increasing = yv >= yu;
        const double lo = std::min(yu, yv), hi = std::max(yu, yv);
        const std::size_t i0 = cell_of(op, lo);
        const std::size_t i1 = cell_of(op, hi);
        double x_prev = increasing ? u : v; // x at the lo side of the walk
        for (std::size_t k = i0; k <= i1; ++k) {
            double x_next;
            if (k == i1) {
                x_next = increasing ? v : u;
            } else {
                x_next = br.invert(op.edge(k + 1));
            }
            const double mass = std::abs(x_next - x_prev);
            if (mass > 0)
                trip.emplace_back(static_cast<int>(k), static_cast<int>(col), mass / h);
            x_prev = x_next;
        }
    };

    for (std::size_t j = 0; j < n_cells; ++j) {
        const double t0 = op.edge(j), t1 = op.edge(j + 1);
        if (t0 < map.c)
            add_piece(j, map.left, t0, std::min(t1, map.c));
        if (t1 > map.c)
            add_piece(j, map.right, std::max(t0, map.c), t1);
    }

    op.P.resize(static_cast<int>(n_cells), static_cast<int>(n_cells));
    op.P.setFromTriplets(trip.begin(), trip.end());
    op.P.makeCompressed();
    return op;
}

AcimDensity stationary_density(const UlamOperator& op, double tol, std::size_t max_iter) {
    const std::size_t n = op.n_cells;
    const double h = op.h();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<int>(n), 1.0 / (op.b - op.a));
    Eigen::VectorXd y(static_cast<int>(n));

    double best = std::numeric_limits<double>::infinity();
    double checkpoint = best;
    AcimDensity out;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        y.noalias() = op.P * x;
        const double resid = h * (y - x).lpNorm<1>();
        x.swap(y);
        if (resid <= tol) {
            out.iterations = it;
            out.residual = resid;
            // renormalize the conserved mass against rounding drift
            const double mass = h * x.sum();
            x /= mass;
            out.rho.assign(x.data(), x.data() + n);
            return out;
        }
        best = std::min(best, resid);
        if (it % 1000 == 0) {
            if (best > 0.5 * checkpoint) {
                // stalled: mix a bit of the uniform density back in
                x = 0.9 * x + Eigen::VectorXd::Constant(static_cast<int>(n),
                                                        0.1 / (op.b - op.a));
            }
            checkpoint = best;
        }
    }
    throw NoConvergence("stationary density power iteration did not reach tolerance",
                        max_iter);
}

SaltusDecomposition saltus_decomposition(const UlamOperator& op,
                                         const AcimDensity& density,
                                         const UnimodalMap& map,
                                         const PostcriticalOrbit& orbit,
                                         double eps_s) {
    const std::size_t n = op.n_cells;
    const double h = op.h();
    SaltusDecomposition out;

    // One-sided quadratic extrapolation of rho to c_1 from the cells whose
    // right edge stays at or below c_1 (the straddling cell is polluted by
    // the jump itself).
    {
        long last = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (op.edge(i + 1) <= map.c1 + 1e-14 * (op.b - op.a))
                last = static_cast<long>(i);
            else
                break;
        }
        const int want = 8;
        if (last + 1 < 3)
            throw ConfigError("grid too coarse left of c1 for the jump fit");
        const int m = static_cast<int>(std::min<long>(want, last + 1));
        Eigen::MatrixXd V(m, 3);
        Eigen::VectorXd r(m);
        for (int k = 0; k < m; ++k) {
            const std::size_t i = static_cast<std::size_t>(last) - static_cast<std::size_t>(m - 1 - k);
            const double t = op.center(i) - map.c1; // centered at the jump
            V(k, 0) = 1.0;
            V(k, 1) = t;
            V(k, 2) = t * t;
            r(k) = density.rho[i];
        }
        const Eigen::Vector3d beta = V.colPivHouseholderQr().solve(r);
        out.s1 = -beta(0);
    }

    // Pushed-forward jumps s_{n+1} = s_n / f'(c_n), truncated once the
    // remaining mass is below eps_s.
    const double lam = map.lambda;
    std::size_t n_jumps = 1;
    {
        // smallest N with |s1| * lam^{-(N-1)} * lam/(lam-1) <= eps_s
        const double s1a = std::max(std::abs(out.s1), 1e-300);
        const double need = std::log(s1a * lam / ((lam - 1.0) * eps_s)) / std::log(lam) + 1.0;
        n_jumps = static_cast<std::size_t>(std::max(1.0, std::ceil(need)));
    }
    if (orbit.size() < n_jumps)
        throw OrbitTooShort(orbit.size(), n_jumps);
    out.jumps.resize(n_jumps);
    out.locations.resize(n_jumps);
    out.jumps[0] = out.s1;
    out.locations[0] = orbit.c(1);
    for (std::size_t k = 1; k < n_jumps; ++k) {
        out.jumps[k] = out.jumps[k - 1] / map.deriv(orbit.c(k));
        out.locations[k] = orbit.c(k + 1);
    }
    out.tail_bound = std::abs(out.s1) * std::pow(lam, 1.0 - static_cast<double>(n_jumps)) /
                     (lam - 1.0);

    // Cell averages of the Heaviside sum: the cell containing c_n is covered
    // on [c_n, edge], later cells fully.
    out.rho_sal.assign(n, 0.0);
    std::vector<double> full(n + 1, 0.0); // difference array for full coverage
    for (std::size_t k = 0; k < n_jumps; ++k) {
        const double cn = out.locations[k];
        const double s = out.jumps[k];
        if (cn >= op.b) continue; // jump at or past the right end carries no mass
        const std::size_t j = cell_of(op, cn);
        out.rho_sal[j] += s * (op.edge(j + 1) - cn) / h;
        if (j + 1 < n) {
            full[j + 1] += s;
            full[n] -= s;
        }
    }
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += full[i];
        out.rho_sal[i] += acc;
    }

    out.rho_reg.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.rho_reg[i] = density.rho[i] - out.rho_sal[i];
    return out;
}

std::vector<cplx> resolvent_solve(const UlamOperator& op, cplx z,
                                  const std::vector<cplx>& g,
                                  double residual_tol,
                                  const std::vector<double>* density) {
    const std::size_t n = op.n_cells;
    if (g.size() != n)
        throw ConfigError("resolvent data does not match the grid");
    const double h = op.h();
    using SpMat = Eigen::SparseMatrix<cplx>;

    const bool near_one = std::abs(z - 1.0) < 0.1;
    if (near_one) {
        cplx mean = 0;
        for (const auto& v : g) mean += v;
        mean *= h;
        if (std::abs(mean) > 1e-8)
            throw MeanNotZero(std::abs(mean));
    }

    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(op.P.nonZeros()) + 3 * n + 1);
    for (int k = 0; k < op.P.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(op.P, k); it; ++it)
            trip.emplace_back(it.row(), it.col(), -z * it.value());
    for (std::size_t i = 0; i < n; ++i)
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), cplx(1.0, 0.0));

    const int dim = static_cast<int>(near_one ? n + 1 : n);
    Eigen::VectorXcd rhs(dim);
    for (std::size_t i = 0; i < n; ++i) rhs(static_cast<int>(i)) = g[i];

    std::vector<double> rho_local;
    if (near_one) {
        // Bordered system [[A, rho], [h*1^T, 0]]: the multiplier absorbs the
        // eigenvalue-1 direction and the solution is confined to mean zero.
        const std::vector<double>* rho = density;
        if (!rho) {
            rho_local = stationary_density(op).rho;
            rho = &rho_local;
        }
        for (std::size_t i = 0; i < n; ++i) {
            trip.emplace_back(static_cast<int>(i), static_cast<int>(n), cplx((*rho)[i] * h, 0.0));
            trip.emplace_back(static_cast<int>(n), static_cast<int>(i), cplx(h, 0.0));
        }
        rhs(static_cast<int>(n)) = 0;
    }

    SpMat A(dim, dim);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw NearSingular("resolvent factorization failed", std::numeric_limits<double>::infinity());
    Eigen::VectorXcd u = lu.solve(rhs);

    const double resid = h * (A * u - rhs).lpNorm<1>();
    if (!(resid <= residual_tol))
        throw NearSingular("resolvent solve residual too large", resid);

    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = u(static_cast<int>(i));
    return out;
}

cplx psi_hol_eval(const UlamOperator& op, const SaltusDecomposition& saltus,
                  const UnimodalMap&, const Perturbation& X,
                  const Observable& phi, cplx z) {
    const std::size_t n = op.n_cells;
    const double h = op.h();
    const bool near_one = std::abs(z - 1.0) < 0.1;
    if (near_one && !phi.mean_normalized)
        throw ConfigError("psi_hol_eval near z = 1 needs a mean-normalized observable");

    // X' * rho_sal as exact cell averages: within a cell the jump profile is
    // piecewise constant, so the average is a telescoping sum of X values.
    std::vector<double> data(n, 0.0);
    {
        std::vector<std::vector<std::size_t>> in_cell(n);
        for (std::size_t k = 0; k < saltus.locations.size(); ++k) {
            if (saltus.locations[k] >= op.b) continue;
            in_cell[cell_of(op, saltus.locations[k])].push_back(k);
        }
        double below = 0; // sum of jumps with c_n below the current cell
        for (std::size_t i = 0; i < n; ++i) {
            const double xe0 = op.edge(i), xe1 = op.edge(i + 1);
            double acc = below * (X(xe1) - X(xe0));
            for (std::size_t k : in_cell[i]) {
                acc += saltus.jumps[k] * (X(xe1) - X(saltus.locations[k]));
                below += saltus.jumps[k];
            }
            data[i] = acc / h;
        }
    }

    // (X * rho_reg)' by centered differences, one-sided at the ends; the
    // discrete integral telescopes to boundary terms only.
    {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = X(op.center(i)) * saltus.rho_reg[i];
        if (n >= 2) {
            data[0] += (v[1] - v[0]) / h;
            data[n - 1] += (v[n - 1] - v[n - 2]) / h;
            for (std::size_t i = 1; i + 1 < n; ++i)
                data[i] += (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
    }

    std::vector<cplx> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = cplx(data[i], 0.0);

    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i)
        rho[i] = saltus.rho_sal[i] + saltus.rho_reg[i];

    // The rho component of the data resolves to (integral of data) rho/(1-z),
    // which a mean-normalized observable annihilates. Dropping it up front is
    // then exact and keeps the solve well conditioned near z = 1; without
    // normalization the component carries real value and must stay.
    if (phi.mean_normalized) {
        double sg = 0, sr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sg += data[i];
            sr += rho[i];
        }
        const double scale = sg / sr;
        for (std::size_t i = 0; i < n; ++i) g[i] -= scale * rho[i];
    }

    const std::vector<cplx> u = resolvent_solve(op, z, g, 1e-8, &rho);

    cplx acc = 0;
    for (std::size_t i = 0; i < n; ++i)
        acc += u[i] * phi(op.center(i));
    return -h * acc;
}

cplx observable_mean(const UlamOperator& op, const AcimDensity& density,
                     const Observable& phi) {
    cplx acc = 0;
    for (std::size_t i = 0; i < op.n_cells; ++i)
        acc += phi(op.center(i)) * density.rho[i];
    return acc * op.h();
}

Observable mean_normalize(const Observable& phi, const UlamOperator& op,
                          const AcimDensity& density) {
    const cplx m = observable_mean(op, density, phi);
    Observable out = phi;
    auto base = phi.f;
    out.f = [base, m](double x) { return base(x) - m; };
    out.mean = 0;
    out.mean_normalized = true;
    out.sup = phi.sup + std::abs(m);
    out.label = phi.label + " - mean";
    return out;
}

} // namespace suscept
