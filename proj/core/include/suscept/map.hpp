#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace suscept {

// Map families. All maps are continuous, piecewise C^3, unimodal on [a,b]
// with f(a) = f(b) = a, a single turning point c, f' > 1 left of c and
// f' < -1 right of c.

struct TentParams {
    double slope = 2.0; // in (1, 2]; turning point at the midpoint of [a,b]
};

struct SkewedTentParams {
    double c = 0.5; // turning point (absolute coordinate in (a,b))
    double h = 1.0; // peak height: f(c) = a + h*(b-a), h in (0, 1]
};

struct PolyParams {
    // Branch polynomials in x (ascending coefficients), valid on [a,c] / [c,b].
    std::vector<double> left;
    std::vector<double> right;
    double c = 0.5;
};

struct MapSpec {
    std::variant<TentParams, SkewedTentParams, PolyParams> family;
    double a = 0.0;
    double b = 1.0;
};

// One monotone branch of the map.
struct Branch {
    double lo = 0, hi = 0; // domain of this branch
    std::function<double(double)> f, df, d2f;
    bool affine = false;   // when true, invert() uses the closed form below
    double m = 0, q = 0;   // f(x) = q + m*x in the affine case

    // Solves f(x) = y on [lo, hi]. Caller guarantees y lies in the branch
    // image; the result is clamped to the domain.
    double invert(double y) const;
};

struct UnimodalMap {
    MapSpec spec;
    double a = 0, b = 0, c = 0;
    Branch left, right;
    double lambda = 0;     // expansion constant inf |f'|
    double sup_slope = 0;  // sup |f'|
    double c1 = 0, c2 = 0; // forward-invariant interval [c2, c1] = [f(f(c)), f(c)]
    bool exact_orbit = false; // tent slope 2: orbit arithmetic is exact in binary fp

    double eval(double x) const { return x <= c ? left.f(x) : right.f(x); }
    double deriv(double x) const { return x <= c ? left.df(x) : right.df(x); }
    double deriv2(double x) const { return x <= c ? left.d2f(x) : right.d2f(x); }
};

// Builds and validates a map. Throws EndpointViolated / DiscontinuousAtC /
// ExpansionViolated when the description is not an admissible unimodal map.
// Validation samples |f'| on a dense grid (1e4 points per branch) and, for
// polynomial branches, additionally refines interior minima of |f'| by
// locating sign changes of f''.
UnimodalMap build_map(const MapSpec& spec);

// One branch of a map given as callables (used for perturbed families).
struct BranchFns {
    std::function<double(double)> f, df, d2f;
};

// Builds a map from per-branch callables and runs the same validation as
// build_map on the sampled grid. The branches must be separate callables:
// validation samples both one-sided derivatives at the turning point, which
// a single piecewise-defined function cannot report.
UnimodalMap build_map_from_callables(double a, double b, double c,
                                     BranchFns left, BranchFns right,
                                     const MapSpec& provenance);

struct Preperiodicity {
    std::size_t preperiod = 0; // smallest m with c_{m+p} = c_m
    std::size_t period = 0;    // smallest such p for that m
    bool proven = false;       // true only when equality is exact in fp
};

// Forward orbit of the critical value: points[k] = c_{k+1} = f^{k+1}(c),
// slopes[k] = f'(c_{k+1}), derivs[n-1] = D_n = (f^n)'(c_1) = prod f'(c_j).
// D_n grows at least like lambda^n and saturates to +-inf for long orbits;
// consumers that divide by D_n use reciprocal recurrences over slopes instead.
struct PostcriticalOrbit {
    std::vector<double> points; // c_1 .. c_K
    std::vector<double> slopes; // f'(c_1) .. f'(c_K)
    std::vector<double> derivs; // D_1 .. D_{K-1}
    std::optional<Preperiodicity> preperiod;

    std::size_t size() const { return points.size(); }
    double c(std::size_t k) const { return points[k - 1]; }     // k >= 1
    double slope(std::size_t k) const { return slopes[k - 1]; } // f'(c_k)
    double D(std::size_t n) const { return n == 0 ? 1.0 : derivs[n - 1]; }
};

// Computes the first K postcritical points and derivative products, and scans
// for (pre)periodicity: exact fp equality counts as proven for the tent
// slope-2 family; otherwise a |c_{m+p} - c_m| <= 1e-13 match that persists
// for ten further steps is recorded as detected-not-proven.
PostcriticalOrbit postcritical_orbit(const UnimodalMap& map, std::size_t K);

// The 0, 1 or 2 solutions of f(x) = y inside the trapping interval [c2, c1],
// ascending, with the duplicate at x = c collapsed.
std::vector<double> preimages(const UnimodalMap& map, double y);

// Backward orbit of the turning point: points[m-1] = y_{-m}, with y_{-1} = c
// and f(y_{-(m+1)}) = y_{-m}. bits[i] selects the branch for the i-th
// pull-back, from y_{-(i+1)} to y_{-(i+2)} (0 = left, 1 = right). Throws
// BranchUnavailable when the selected preimage leaves [c2, c1].
struct PrecriticalOrbit {
    std::vector<double> points; // y_{-1}, y_{-2}, ..., y_{-M}
    std::vector<std::uint8_t> bits;

    std::size_t depth() const { return points.size(); }
    double y(long n) const { return points[static_cast<std::size_t>(-n) - 1]; } // n <= -1
};

PrecriticalOrbit precritical_orbit(const UnimodalMap& map,
                                   const std::vector<std::uint8_t>& bits,
                                   std::size_t M);

// Internal helper shared by the Ulam build and preimages(): branch-inverse
// without the trapping-interval filter.
double branch_invert(const Branch& br, double y);

} // namespace suscept
