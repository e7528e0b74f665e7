#pragma once

#include "suscept/acim.hpp"
#include "suscept/map.hpp"
#include "suscept/observable.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace suscept {

// A truncated series evaluation together with a certified bound on the
// dropped remainder and the truncation index actually used.
struct SeriesValue {
    cplx value = 0;
    double tail = 0;
    std::size_t terms = 0;
};

// sup * sum_{k >= K} k^d r^k in closed form (d <= 3), used for certified
// truncation of geometric-with-polynomial-weight tails. Requires 0 <= r < 1.
double geom_poly_tail(double sup, double r, std::size_t K, int d = 0);

// Deterministic stream of rotations 1, e^{i w}, e^{2i w}, ...: repeated
// multiplication with periodic renormalization. Both the summation code and
// the telescoping tests draw from this stream so the two sides cancel to
// rounding level.
class RotationStream {
public:
    explicit RotationStream(double omega);
    cplx next(); // returns the current rotation, then advances
private:
    cplx rot_, w_{1.0, 0.0};
    unsigned count_ = 0;
};

// Rotated partial sums S_k(e^{i omega}) = sum_{j=0}^{k-1} e^{ij omega}
// phi(c_{j+1}) for k = 1..m, compensated summation.
std::vector<cplx> rotated_sums(const PostcriticalOrbit& orbit,
                               const Observable& phi, double omega,
                               std::size_t m);

enum class SigmaMode { Direct, Abel };

// Power series with coefficients phi(c_{k+1}). Direct mode sums
// phi(c_{k+1}) z^k; Abel mode factors z = e^{i omega} z' and sums
// (1 - z') sum_k S_k(e^{i omega}) z'^{k-1}. Both truncate at the smallest K
// whose certified tail is below tol; OrbitTooShort if the stored orbit
// cannot reach it.
SeriesValue sigma_eval(const PostcriticalOrbit& orbit, const Observable& phi,
                       cplx z, SigmaMode mode = SigmaMode::Direct,
                       double tol = 1e-10, double omega = 0.0);

// Streaming variant for very long truncations (iterates the map on the fly,
// O(1) memory). Direct mode only.
SeriesValue sigma_eval_streamed(const UnimodalMap& map, const Observable& phi,
                                cplx z, double tol, std::size_t max_terms);

// d-th z-derivative of sigma, term by term with falling-factorial weights:
// sum_{k>=d} phi(c_{k+1}) k!/(k-d)! z^{k-d}; certified polynomial-weight tail.
SeriesValue sigma_deriv_eval(const PostcriticalOrbit& orbit,
                             const Observable& phi, cplx z, int deriv,
                             double tol = 1e-10);

// Outer continuation from a backward orbit: -sum_{m>=1} phi(y_{-m}) z^{-m},
// holomorphic in |z| > 1 and vanishing at infinity.
SeriesValue sigma_outer_eval(const PrecriticalOrbit& pre, const Observable& phi,
                             cplx z, double tol = 1e-10);

// Exact rational form for (pre)periodic orbits:
//   sigma(z) = P(z) + Q(z) / (1 - z^p),
// P of degree m-2 holding the transient coefficients, Q covering one period
// starting at z^{m-1}. (The head stops at k = m-1: letting it run to k = m
// would double-count the z^{m-1} coefficient against the expansion of the
// periodic part.)
struct RationalSigma {
    std::vector<cplx> head;     // P: coefficients of z^0 .. z^{m-2}
    std::vector<cplx> cycle;    // Q: coefficients of z^{m-1} .. z^{m+p-2}
    std::size_t preperiod = 0;  // m
    std::size_t period = 0;     // p

    cplx eval(cplx z) const;
    cplx coefficient(std::size_t k) const; // Taylor coefficient of z^k
    // Residue of the z-form at a simple pole z0 with z0^p = 1: -z0 Q(z0)/p.
    cplx residue_rational(cplx z0) const;
    // Rotation-average convention: (1/p) sum_{k=m}^{m+p-1} e^{i w (k-1)} phi(c_k)
    // = Q(e^{i w})/p; differs from residue_rational by the factor -z0.
    cplx residue_rotation(double omega) const;
};

RationalSigma rational_sigma(const PostcriticalOrbit& orbit, const Observable& phi);

// Discounted tail transform of the perturbation along the orbit of c_ell:
//   alpha(c_ell, z) = -sum_{j>=1} X(c_{ell+j}) / (z^j (f^j)'(c_ell)),
// convergent for |z| lambda > 1; deriv selects the d-th z-derivative
// (term-by-term, rising-factorial weights). Evaluated by a reciprocal
// recurrence so saturated derivative products never enter.
SeriesValue alpha_eval(const UnimodalMap& map, const PostcriticalOrbit& orbit,
                       const Perturbation& X, std::size_t ell, cplx z,
                       int deriv = 0, double tol = 1e-10);

// The two singular addends of the susceptibility decomposition
//   Psi(z) = prefactor(z) * sigma_phi(z) + remainder(z) + Psi_hol(z):
//   prefactor(z) = s1 (alpha(c_1, z) - X(c_1))
//   remainder(z) = -s1 sum_j phi(c_j) alpha(c_j, z) / D_{j-1}.
// prefactor(1) = 0 exactly when X is horizontal, and its derivatives at 1
// vanish up to the horizontality order.
struct SingularFactors {
    SeriesValue prefactor;
    SeriesValue remainder;
};

SingularFactors singular_factors(const UnimodalMap& map,
                                 const PostcriticalOrbit& orbit, double s1,
                                 const Perturbation& X, const Observable& phi,
                                 cplx z, double tol = 1e-10);

// Weighted orbit sums sum_{n>=ell} n!/(n-ell)! X(c_{n+1}) / D_n whose
// vanishing for ell = 0..H-1 characterizes horizontality of order H.
SeriesValue horizontality_sum(const UnimodalMap& map,
                              const PostcriticalOrbit& orbit,
                              const Perturbation& X, int ell = 0,
                              double tol = 1e-12);

// Corrects X0 by a combination of basis directions so the weighted orbit
// sums vanish through the requested order. Throws SingularSystem when the
// (order x order) correction system is ill-conditioned, and records the
// achieved residuals on the returned perturbation.
Perturbation make_horizontal(const UnimodalMap& map,
                             const PostcriticalOrbit& orbit, const Expr& X0,
                             const std::vector<Expr>& basis, std::size_t order,
                             double tol = 1e-10);

struct SusceptibilityContext {
    const UnimodalMap& map;
    const PostcriticalOrbit& orbit;
    const UlamOperator& op;
    const SaltusDecomposition& saltus;
};

enum class AssemblyRoute {
    Auto,
    Factorized,  // prefactor * sigma + remainder + holomorphic correction
    Coefficient, // single power series in z for the singular part (small |z|)
};

struct SusceptibilityValue {
    SeriesValue total;
    cplx singular_part = 0;   // prefactor * sigma + remainder (or series form)
    cplx hol_part = 0;
    cplx prefactor = 0;       // 0 when the coefficient route was taken
    cplx sigma = 0;
    cplx remainder = 0;
    AssemblyRoute route = AssemblyRoute::Factorized;
};

// Assembled susceptibility value. Inside the disc the factorized route needs
// |z| lambda > 1; below that the singular part falls back to its coefficient
// series, which converges in the whole open disc. Outside the disc
// (1 < |z| < 1.05) a precritical orbit must be supplied and sigma is replaced
// by its outer continuation.
SusceptibilityValue susceptibility_eval(const SusceptibilityContext& ctx,
                                        const Perturbation& X,
                                        const Observable& phi, cplx z,
                                        double tol = 1e-8,
                                        const PrecriticalOrbit* outer = nullptr,
                                        AssemblyRoute route = AssemblyRoute::Auto);

// Taylor coefficients int X (phi o f^k)' rho dx of the quadrature oracle,
// composite midpoint with refine subpanels per density cell (rho held at its
// cell average). Deep iterates oscillate at scale lambda^{-k}, so refinement
// pushes the depth at which the quadrature decoheres a few levels further.
std::vector<cplx> susceptibility_direct_coeffs(
    const UnimodalMap& map, const UlamOperator& op, const AcimDensity& density,
    const Perturbation& X, const Observable& phi, std::size_t terms,
    std::size_t refine = 1);

// Quadrature oracle for the defining series: sum_k z^k int X (phi o f^k)'
// rho dx. Oracle-grade: the tail constant is estimated from the trailing
// computed coefficients, not certified.
SeriesValue susceptibility_direct(const UnimodalMap& map, const UlamOperator& op,
                                  const AcimDensity& density,
                                  const Perturbation& X, const Observable& phi,
                                  cplx z, std::size_t terms,
                                  std::size_t refine = 1);

// Convergent resummation of the remainder at z = 1 for horizontal X:
//   sum_j phi(c_j) T_j,  T_j = sum_{k>=j} s1 X(c_{k+1}) / D_k.
SeriesValue v_at_one_resummed(const UnimodalMap& map,
                              const PostcriticalOrbit& orbit, double s1,
                              const Perturbation& X, const Observable& phi,
                              double tol = 1e-10);

} // namespace suscept
