#pragma once

#include "suscept/map.hpp"
#include "suscept/observable.hpp"
#include "suscept/series.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace suscept {

// A function sampled on the disc (or its exterior) together with certified
// truncation tails.
using Evaluator = std::function<SeriesValue(cplx)>;

// Nontangential approach data: radial samples z_j = r_j e^{i omega} with
// r_j = 1 - 2^{-j}. Radial approach satisfies the sector inequality
// 1 - |z| <= |1 - z e^{-i omega}| <= C(S) (1 - |z|) with C(S) = 1; the
// recorded half-aperture documents the sector the approach is quoted for,
// with C(S) = 1 / cos(half_aperture). When outer is set, the evaluator is
// called at 1/z_j (so it sees points with modulus > 1 approaching the same
// boundary vertex).
struct SectorSpec {
    double omega = 0.0;
    double half_aperture = 0.0; // < pi/2
    int j_lo = 4, j_hi = 15;
    bool outer = false;

    double cs() const;
    std::vector<cplx> points() const; // inner approach points r_j e^{i omega}
};

struct ScanSample {
    double x = 0;   // abscissa: r, r_j, or m depending on the scan kind
    cplx value = 0;
    double aux = 0; // kind-specific: certified tail, error, or running sup
};

struct ScanReport {
    std::string kind;
    std::vector<ScanSample> samples;
    double slope = 0;  // fitted trend where applicable
    cplx limit = 0;    // extrapolated limit where applicable
    double err = 0;    // successive-difference error estimate
    std::string verdict;
};

// L^1(d omega) arc integrals of the evaluator on circles of radius r,
// composite midpoint quadrature with panel doubling until the integral
// changes by < 1%. Verdict "growth-consistent-with-strong-boundary" when
// the last four ratios between consecutive r (which double 1/(1-r)) all
// exceed 1.05; "bounded" otherwise, so a convergent reference series is
// not mistaken for boundary growth.
ScanReport radial_scan(const Evaluator& eval, double omega_lo, double omega_hi,
                       const std::vector<double>& radii,
                       std::size_t initial_panels = 1024);

enum class NtWeight {
    None,       // the function itself
    PoleFactor, // multiplied by (z - e^{i omega}), or (1/z - e^{-i omega}) outside
};

// Evaluates along the sector's radii, extrapolates from the last three
// samples (limit = last value, err = last successive difference plus the
// certified tail), verdict "converged" when the successive differences
// are nonincreasing at the end.
ScanReport nontangential_limit(const Evaluator& eval, const SectorSpec& sector,
                               NtWeight weight = NtWeight::None);

struct WwSample {
    double omega = 0;
    std::size_t m = 0;
    double modulus = 0; // |(1/m) sum_{k<m} e^{i omega k} phi(c_{k+1})|
};

struct WwReport {
    std::vector<WwSample> samples;
    std::vector<std::string> per_omega_verdicts;
    bool all_decaying = false;
};

// Rotated ergodic averages over the checkpoints in ms. Decaying verdict per
// omega when the last decade of checkpoints drops by a factor >= 2. The
// omega = 0 row is only meaningful for mean-normalized observables; an
// unnormalized observable is surfaced in the verdict, not thrown.
WwReport wiener_wintner_check(const PostcriticalOrbit& orbit,
                              const Observable& phi,
                              const std::vector<double>& omegas,
                              const std::vector<std::size_t>& ms);

// RHS minus LHS of the van der Corput inequality
//   |sum_{k<n} u_k|^2 <= (n+h)/(h+1) sum_{k<n} |u_k|^2
//     + 2 (n+h)/(h+1)^2 sum_{r=1}^{h} (h+1-r) |sum_{k<n-r} u_{k+r} conj(u_k)|,
// nonnegative for every complex sequence.
double van_der_corput_slack(const std::vector<cplx>& u, std::size_t n,
                            std::size_t h);

// |S_m(e^{i omega})| / sqrt(m log log m) over the checkpoints (m >= 3),
// with the running sup in aux. Verdict "plateaued" when the running sup is
// not improved during the last decade of checkpoints.
ScanReport lil_ratio(const PostcriticalOrbit& orbit, const Observable& phi,
                     double omega, const std::vector<std::size_t>& ms);

// The square-root-of-LIL majorant L(r) = sum_{k>=3} r^{k-1} sqrt(k log log k):
// direct summation against the envelope M (1-r)^{-3/2} (log log 1/(1-r))^{1/2}
// with M fitted as the max ratio over the scanned radii. slope is the fitted
// log L vs log(1-r) slope; samples carry (r, L(r), ratio-to-envelope).
ScanReport lil_envelope_check(const std::vector<double>& radii);

// Fits C in |g(z)| <= C |z - e^{i omega}|^{-1/2} (log log |z - e^{i omega}|^{-1})^{1/2}
// over boundary-approach samples; returns the max ratio (the fitted C) with
// per-sample ratios in aux.
ScanReport sector_bound_fit(const std::vector<std::pair<cplx, cplx>>& samples,
                            double omega);

// Reference series with an explicit strong natural boundary:
// g(z) = sum_k ({k theta} - 1/2) z^k, truncated at K terms with tail bound.
SeriesValue hecke_reference(double theta, cplx z, std::size_t K);

struct HeckeGap {
    cplx outer_value = 0; // g_{b_-}(z) from the explicit right limit
    cplx inner_value = 0; // g(1/z)
    double gap = 0;       // |outer - inner - 1/2|
    double combined_tails = 0;
};

// Checks the right-limit continuation identity g_{b_-}(z) = g(z^{-1}) + 1/2
// from the explicit negative-side coefficients {n theta} - 1/2, n <= -1.
HeckeGap hecke_rrl_check(double theta, cplx z, std::size_t K);

struct TelescopingReport {
    double max_residual = 0;
    std::size_t argmax_k = 0;
};

// For the rotated coboundary phi = psi - e^{i omega} psi o f, the rotated
// partial sums telescope: S_k = psi(c_1) - e^{ik omega} psi(c_{k+1}). Both
// sides are computed from one shared rotation stream with compensated
// summation, so the residual stays at rounding level uniformly in k.
TelescopingReport coboundary_telescoping_check(
    const PostcriticalOrbit& orbit, const std::function<double(double)>& psi,
    double omega, std::size_t K);

} // namespace suscept
