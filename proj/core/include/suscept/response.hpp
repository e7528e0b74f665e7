#pragma once

#include "suscept/acim.hpp"
#include "suscept/diagnostics.hpp"
#include "suscept/right_limits.hpp"
#include "suscept/series.hpp"

#include <cstdint>
#include <vector>

namespace suscept {

// The perturbed family realized linearly, f_t = f + t * (X o f), so the
// t-derivative at 0 is X o f by construction and the endpoint images are
// pinned by X(a) = 0. Expansion survives for |t| <= t_max with the
// conservative threshold t_max = (lambda - 1) / (lambda sup|X'| + 1).
struct FamilyAtT {
    double t = 0;
    double t_max = 0;
    UnimodalMap map; // revalidated realized map
};

double family_t_max(const UnimodalMap& map, const Perturbation& X);

FamilyAtT family_at(const UnimodalMap& map, const Perturbation& X, double t);

struct FdEstimate {
    cplx value = 0;      // 4-point stencil (-M(2h) + 8M(h) - 8M(-h) + M(-2h)) / 12h
    cplx two_point = 0;  // (M(h) - M(-h)) / 2h, kept so instability is visible
    double err = 0;      // stencil gap + grid sensitivity + amplified residual
    double grid_gap = 0; // |stencil at n_cells - stencil at n_cells / 2|
    std::vector<std::pair<double, cplx>> means; // (t, int phi dmu_t), ascending t
};

// Finite-difference estimate of d/dt int phi dmu_t at t = 0. The four
// stationary densities at +-t0, +-2t0 are solved concurrently.
FdEstimate response_fd(const UnimodalMap& map, const Perturbation& X,
                       const Observable& phi, double t0 = 1e-3,
                       std::size_t n_cells = 8192);

struct FormulaValue {
    cplx value = 0;   // remainder(1) + hol(1)
    double err = 0;   // series tails + resummation gap (caller may add grid error)
    cplx v_at_one = 0;
    cplx hol_at_one = 0;
    double cross_check_gap = 0; // factorized remainder vs direct resummation
};

// Closed-form response value for horizontal X and mean-normalized phi.
// The remainder at z = 1 comes from the factorized evaluation and is
// cross-checked against the independent resummation; disagreement beyond
// 1e-6 relative aborts with NoConvergence. Throws NotHorizontal when the
// order-0 weighted orbit sum exceeds 1e-8.
FormulaValue response_formula(const SusceptibilityContext& ctx,
                              const Perturbation& X, const Observable& phi,
                              double tol = 1e-8);

struct ValueWithError {
    cplx value = 0;
    double err = 0;
};

struct ResponseConfig {
    double t0 = 1e-3;
    std::size_t n_cells = 8192;
    std::size_t orbit_len = 1200000;     // postcritical prefix for series sums
    std::size_t precritical_depth = 1100000; // backward orbit for the outer column
    std::size_t birkhoff_m = 10000;
    double birkhoff_tol = 0.05;
    int j_lo = 4;
    int j_hi = 15;
    std::uint64_t seed = 1;
    double tol = 1e-8;
};

struct ResponseReport {
    ValueWithError fd;
    ValueWithError formula;
    ValueWithError nt_inner;
    ValueWithError nt_outer;
    bool formula_available = false; // false when X is not horizontal
    double u_at_one = 0;            // |prefactor(1)|, the obstruction when suppressed
    HorizontalityRecord horizontality;
    BirkhoffDiagnostic birkhoff;    // diagnostic for the chosen backward orbit
    std::uint64_t birkhoff_seed = 0;
    double spread = 0;              // max pairwise gap / max magnitude, available columns
    bool consistent = false;        // every pairwise gap within summed error bars
};

// Side-by-side comparison of the four routes to the response value:
// finite differences in t, the closed formula at z = 1, and nontangential
// extrapolation of the assembled susceptibility from inside (z -> 1^-) and
// outside (z -> 1^+, through the backward-orbit continuation). For
// non-horizontal X the formula column is suppressed and the prefactor
// obstruction is reported instead; the remaining columns still appear.
ResponseReport response_report(const UnimodalMap& map, const Perturbation& X,
                               const Observable& phi, const ResponseConfig& cfg);

} // namespace suscept
