#include "suscept/response.hpp"

#include "suscept/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <utility>

namespace suscept {

double family_t_max(const UnimodalMap& map, const Perturbation& X) {
    return (map.lambda - 1.0) / (map.lambda * X.sup_deriv + 1.0);
}

FamilyAtT family_at(const UnimodalMap& map, const Perturbation& X, double t) {
    FamilyAtT fam;
    fam.t = t;
    fam.t_max = family_t_max(map, X);
    if (std::abs(t) > fam.t_max)
        throw ExpansionViolated(map.c,
                                map.lambda * (1.0 - std::abs(t) * X.sup_deriv));

    const Expr Xe = X.X;
    const Expr dXe = X.dX;
    const Expr d2Xe = X.dX.derivative();
    // per-branch closures so both one-sided derivatives stay available at c
    const auto perturbed = [&](const Branch& branch) {
        const Branch br = branch; // self-contained copy for the closures
        BranchFns out;
        out.f = [br, Xe, t](double x) {
            const double v = br.f(x);
            return v + t * Xe(v);
        };
        out.df = [br, dXe, t](double x) {
            return br.df(x) * (1.0 + t * dXe(br.f(x)));
        };
        out.d2f = [br, dXe, d2Xe, t](double x) {
            const double v = br.f(x);
            const double d = br.df(x);
            return br.d2f(x) * (1.0 + t * dXe(v)) + t * d * d * d2Xe(v);
        };
        return out;
    };
    fam.map = build_map_from_callables(map.a, map.b, map.c,
                                       perturbed(map.left), perturbed(map.right),
                                       map.spec);
    return fam;
}

FdEstimate response_fd(const UnimodalMap& map, const Perturbation& X,
                       const Observable& phi, double t0, std::size_t n_cells) {
    if (!(t0 > 0.0)) throw ConfigError("finite differences need t0 > 0");
    const double t_max = family_t_max(map, X);
    if (2.0 * t0 > t_max)
        throw ExpansionViolated(map.c,
                                map.lambda * (1.0 - 2.0 * t0 * X.sup_deriv));

    struct Solve {
        cplx mean;
        double residual;
    };
    const std::vector<double> ts = {-2.0 * t0, -t0, t0, 2.0 * t0};
    const std::vector<std::size_t> grids = {n_cells, n_cells / 2};
    std::vector<std::future<Solve>> futs;
    futs.reserve(ts.size() * grids.size());
    for (std::size_t cells : grids)
        for (double t : ts)
            futs.push_back(std::async(std::launch::async,
                                      [&map, &X, &phi, cells, t]() -> Solve {
                const FamilyAtT fam = family_at(map, X, t);
                const UlamOperator op = build_ulam(fam.map, cells);
                const AcimDensity dens = stationary_density(op);
                return {observable_mean(op, dens, phi), dens.residual};
            }));

    std::vector<Solve> sol;
    sol.reserve(futs.size());
    for (auto& fut : futs) sol.push_back(fut.get());

    const auto stencil = [t0](const Solve* s) {
        return (-s[3].mean + 8.0 * s[2].mean - 8.0 * s[1].mean + s[0].mean) /
               (12.0 * t0);
    };
    FdEstimate out;
    for (std::size_t i = 0; i < ts.size(); ++i)
        out.means.emplace_back(ts[i], sol[i].mean);
    out.value = stencil(sol.data());
    out.two_point = (sol[2].mean - sol[1].mean) / (2.0 * t0);
    out.grid_gap = std::abs(out.value - stencil(sol.data() + ts.size()));
    double resid = 0.0;
    for (const auto& s : sol) resid = std::max(resid, s.residual);
    // three honest error sources: the stencil gap for truncation in t (mu_t is
    // only Lipschitz-type in t in general), the full-vs-half grid gap for the
    // cell discretization that does not cancel across the four solves, and the
    // density solver residual amplified through the difference weights
    out.err = std::abs(out.value - out.two_point) + out.grid_gap +
              1.5 * phi.sup * resid / t0;
    return out;
}

FormulaValue response_formula(const SusceptibilityContext& ctx,
                              const Perturbation& X, const Observable& phi,
                              double tol) {
    const SeriesValue h0 = horizontality_sum(ctx.map, ctx.orbit, X, 0, 1e-12);
    if (std::abs(h0.value) > 1e-8) throw NotHorizontal(std::abs(h0.value));
    if (!phi.mean_normalized) throw MeanNotZero(std::abs(phi.mean));

    FormulaValue out;
    const SingularFactors sf = singular_factors(ctx.map, ctx.orbit,
                                                ctx.saltus.s1, X, phi,
                                                cplx(1.0, 0.0), tol);
    const SeriesValue v2 = v_at_one_resummed(ctx.map, ctx.orbit, ctx.saltus.s1,
                                             X, phi, tol);
    out.v_at_one = sf.remainder.value;
    out.cross_check_gap = std::abs(sf.remainder.value - v2.value);
    const double allowed = 1e-6 * std::max(1.0, std::abs(out.v_at_one)) +
                           sf.remainder.tail + v2.tail;
    if (out.cross_check_gap > allowed)
        throw NoConvergence("remainder resummation cross-check failed, gap " +
                                std::to_string(out.cross_check_gap),
                            v2.terms);
    out.hol_at_one = psi_hol_eval(ctx.op, ctx.saltus, ctx.map, X, phi,
                                  cplx(1.0, 0.0));
    out.value = out.v_at_one + out.hol_at_one;
    out.err = sf.remainder.tail + v2.tail + out.cross_check_gap;
    return out;
}

ResponseReport response_report(const UnimodalMap& map, const Perturbation& X,
                               const Observable& phi,
                               const ResponseConfig& cfg) {
    ResponseReport rep;

    const UlamOperator op = build_ulam(map, cfg.n_cells);
    const AcimDensity dens = stationary_density(op);
    const PostcriticalOrbit orbit = postcritical_orbit(map, cfg.orbit_len);
    const SaltusDecomposition saltus = saltus_decomposition(op, dens, map, orbit);
    const SusceptibilityContext ctx{map, orbit, op, saltus};

    Observable obs = phi.mean_normalized ? phi : mean_normalize(phi, op, dens);

    for (int ell = 0; ell < 2; ++ell) {
        const SeriesValue h = horizontality_sum(map, orbit, X, ell, 1e-12);
        rep.horizontality.residuals.push_back(std::abs(h.value));
    }
    while (rep.horizontality.order < rep.horizontality.residuals.size() &&
           rep.horizontality.residuals[rep.horizontality.order] <= 1e-8)
        ++rep.horizontality.order;

    const FdEstimate fd = response_fd(map, X, obs, cfg.t0, cfg.n_cells);
    rep.fd = {fd.value, fd.err};

    const SingularFactors sf1 = singular_factors(map, orbit, saltus.s1, X, obs,
                                                 cplx(1.0, 0.0), cfg.tol);
    rep.u_at_one = std::abs(sf1.prefactor.value);

    rep.formula_available = rep.horizontality.residuals[0] <= 1e-8;
    if (rep.formula_available) {
        FormulaValue fv = response_formula(ctx, X, obs, cfg.tol);
        // grid-refinement gap bounds the discretization error of the
        // holomorphic part, which the series tails cannot see
        const UlamOperator op2 = build_ulam(map, cfg.n_cells / 2);
        const AcimDensity dens2 = stationary_density(op2);
        const SaltusDecomposition saltus2 =
            saltus_decomposition(op2, dens2, map, orbit);
        const cplx hol2 = psi_hol_eval(op2, saltus2, map, X, obs, cplx(1.0, 0.0));
        fv.err += std::abs(fv.hol_at_one - hol2);
        rep.formula = {fv.value, fv.err};
    }

    SectorSpec inner;
    inner.omega = 0.0;
    inner.j_lo = cfg.j_lo;
    inner.j_hi = cfg.j_hi;
    inner.outer = false;
    const Evaluator inner_eval = [&](cplx z) {
        return susceptibility_eval(ctx, X, obs, z, cfg.tol).total;
    };
    const ScanReport nt_in = nontangential_limit(inner_eval, inner, NtWeight::None);
    rep.nt_inner = {nt_in.limit, nt_in.err};

    // backward orbit for the outer column: resample until the Birkhoff
    // diagnostic passes, deterministically in the seed
    PrecriticalOrbit pre;
    for (std::uint64_t s = cfg.seed; s < cfg.seed + 8; ++s) {
        pre = sample_precritical(map, op, dens, cfg.precritical_depth, s);
        rep.birkhoff = birkhoff_precritical_check(pre, obs, obs.mean,
                                                  cfg.birkhoff_m,
                                                  cfg.birkhoff_tol);
        rep.birkhoff_seed = s;
        if (rep.birkhoff.pass) break;
    }

    SectorSpec outer = inner;
    outer.outer = true;
    outer.j_lo = std::max(cfg.j_lo, 5); // keep 1/r inside the outer shell
    const Evaluator outer_eval = [&](cplx z) {
        return susceptibility_eval(ctx, X, obs, z, cfg.tol, &pre).total;
    };
    const ScanReport nt_out = nontangential_limit(outer_eval, outer, NtWeight::None);
    rep.nt_outer = {nt_out.limit, nt_out.err};

    std::vector<ValueWithError> cols = {rep.fd, rep.nt_inner, rep.nt_outer};
    if (rep.formula_available) cols.push_back(rep.formula);
    double scale = 0.0, max_gap = 0.0;
    bool ok = true;
    for (const auto& c : cols) scale = std::max(scale, std::abs(c.value));
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (std::size_t j = i + 1; j < cols.size(); ++j) {
            const double gap = std::abs(cols[i].value - cols[j].value);
            max_gap = std::max(max_gap, gap);
            if (gap > cols[i].err + cols[j].err) ok = false;
        }
    rep.spread = scale > 0.0 ? max_gap / scale : 0.0;
    rep.consistent = ok;
    return rep;
}

} // namespace suscept
