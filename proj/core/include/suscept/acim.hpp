#pragma once

#include "suscept/map.hpp"
#include "suscept/observable.hpp"

#include <Eigen/SparseCore>

#include <complex>
#include <cstddef>
#include <vector>

namespace suscept {

// Cell-averaged discretization of the transfer operator on a uniform grid
// over [a, b]. P is column-stochastic: P(i, j) = |cell_j intersect
// f^{-1}(cell_i)| / h. Columns sum to 1 exactly up to rounding because the
// per-column masses telescope across shared preimage boundaries.
struct UlamOperator {
    double a = 0, b = 0;
    std::size_t n_cells = 0;
    Eigen::SparseMatrix<double> P;

    double h() const { return (b - a) / static_cast<double>(n_cells); }
    double edge(std::size_t i) const { return a + (b - a) * static_cast<double>(i) / static_cast<double>(n_cells); }
    double center(std::size_t i) const { return a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n_cells); }
};

UlamOperator build_ulam(const UnimodalMap& map, std::size_t n_cells);

struct AcimDensity {
    std::vector<double> rho; // cell averages, h * sum = 1
    double residual = 0;     // L1 fixed-point residual at exit
    std::size_t iterations = 0;
};

// Power iteration from the uniform start, mass-conserving, with a mix-in
// restart if the residual stalls. Throws NoConvergence past max_iter.
AcimDensity stationary_density(const UlamOperator& op, double tol = 1e-10,
                               std::size_t max_iter = 50000);

// Jump (saltus) part of the invariant density: rho_sal = sum_n s_n H_{c_n}
// with H_x = indicator of [x, infinity), s_1 = -lim_{x up c_1} rho(x) and
// s_{n+1} = s_n / f'(c_n). The grid representations are cell averages.
struct SaltusDecomposition {
    double s1 = 0;
    std::vector<double> jumps;     // s_1 .. s_{N_s}
    std::vector<double> locations; // c_1 .. c_{N_s}
    std::vector<double> rho_sal;
    std::vector<double> rho_reg;   // rho - rho_sal
    double tail_bound = 0;         // bound on the dropped jump mass
};

SaltusDecomposition saltus_decomposition(const UlamOperator& op,
                                         const AcimDensity& density,
                                         const UnimodalMap& map,
                                         const PostcriticalOrbit& orbit,
                                         double eps_s = 1e-10);

// Solves (Id - z P) u = g by sparse LU. Within |z - 1| < 0.1 the data must
// have discrete integral below 1e-8 (error MeanNotZero) and the solve is
// deflated to the mean-zero complement through a bordered system whose
// multiplier absorbs the eigenvalue-1 direction. Throws NearSingular when
// the solve residual exceeds residual_tol.
std::vector<cplx> resolvent_solve(const UlamOperator& op, cplx z,
                                  const std::vector<cplx>& g,
                                  double residual_tol = 1e-8,
                                  const std::vector<double>* density = nullptr);

// Correction term holomorphic past the unit circle:
//   -∫ (Id - zP)^{-1} [X' rho_sal + (X rho_reg)'] phi dx.
// The X' rho_sal product is assembled as exact cell averages so the discrete
// integral of the data matches its analytic value; (X rho_reg)' uses centered
// differences. Near z = 1 the observable must be mean-normalized and the
// perturbation horizontal (surfaced as MeanNotZero by the deflated solve).
cplx psi_hol_eval(const UlamOperator& op, const SaltusDecomposition& saltus,
                  const UnimodalMap& map, const Perturbation& X,
                  const Observable& phi, cplx z);

// Midpoint-rule integral of an observable against the invariant density.
cplx observable_mean(const UlamOperator& op, const AcimDensity& density,
                     const Observable& phi);

// Returns a copy of phi with its invariant mean subtracted and recorded.
Observable mean_normalize(const Observable& phi, const UlamOperator& op,
                          const AcimDensity& density);

} // namespace suscept
