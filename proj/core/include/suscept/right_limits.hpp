#pragma once

#include "suscept/acim.hpp"
#include "suscept/map.hpp"
#include "suscept/observable.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace suscept {

// Finite two-sided window approximating a right limit of the postcritical
// point sequence a_k = c_{k+1}. Entry b_n lives at values[n + half_width];
// gaps[n + half_width] bounds the fluctuation of that entry over the last
// two recording indices (zero for exactly constructed windows).
struct RightLimitWindow {
    std::vector<std::size_t> centers; // orbit indices k_j the window was read at
    long half_width = 0;
    std::vector<double> values; // b_{-W} .. b_{W}
    std::vector<double> gaps;

    double b(long n) const { return values[static_cast<std::size_t>(n + half_width)]; }
    double gap(long n) const { return gaps[static_cast<std::size_t>(n + half_width)]; }
};

// Reads the window at the given centers: b_n = a_{k_J + n} from the last
// center, gaps as the spread over the last two centers. Requires every
// k_j - W >= 0 and k_j + W within the stored orbit.
RightLimitWindow window_at_indices(const PostcriticalOrbit& orbit,
                                   std::vector<std::size_t> centers, long W);

// Renascent window: b_n = c_{n+1} for n >= 0 glued to a precritical orbit
// (b_n = y_n for n <= -1, so b_{-1} = c). Exact by construction.
RightLimitWindow glue_renascent(const PostcriticalOrbit& orbit,
                                const PrecriticalOrbit& pre, long W);

struct OrbitViolation {
    long n = 0;
    double deviation = 0;
    double allowed = 0;
};

struct OrbitCheckVerdict {
    bool pass = true;
    std::vector<OrbitViolation> violations;
};

// Verifies b_{n+1} = f(b_n) for -W <= n < W within
// max(gap_n, gap_{n+1}, 1e-9); a perturbed entry surfaces as a violation at
// its own index (and at its predecessor when one exists).
OrbitCheckVerdict complete_orbit_check(const UnimodalMap& map,
                                       const RightLimitWindow& window);

// Breadth-first enumeration of inverse-branch strings surviving in
// [c2, c1], truncated at cap orbits per level.
struct PrecriticalTree {
    std::size_t depth = 0;
    bool truncated = false;
    std::vector<PrecriticalOrbit> orbits;     // survivors at full depth
    std::vector<std::size_t> branch_counts;   // survivors per depth 1..M
    bool two_choice_bound_met = false;        // count(M) >= min(cap, 2^{floor(M/2)})
};

PrecriticalTree enumerate_precritical(const UnimodalMap& map, std::size_t M,
                                      std::size_t cap = 1000000);

// Random backward orbit with branch choice weighted by rho(x)/|f'(x)|,
// the stationary backward kernel, so long orbits are Birkhoff typical for
// the acim. Deterministic in the seed.
PrecriticalOrbit sample_precritical(const UnimodalMap& map, const UlamOperator& op,
                                    const AcimDensity& density, std::size_t M,
                                    std::uint64_t seed);

// Backward Birkhoff average check: |(1/m) sum_{j<=m} phi(y_{-j}) - mean|.
struct BirkhoffDiagnostic {
    double deviation = 0;
    std::size_t m = 0;
    bool pass = false;
};

BirkhoffDiagnostic birkhoff_precritical_check(const PrecriticalOrbit& pre,
                                              const Observable& phi, cplx mean,
                                              std::size_t m, double tol);

// Preimage sets f^{-l}(x0) of increasing depth until eps-dense in [c2, c1].
struct CoveringDepth {
    std::size_t depth = 0;
    std::vector<double> points; // the eps-dense preimage set, ascending
};

CoveringDepth covering_depth(const UnimodalMap& map, double x0, double eps,
                             std::size_t point_budget = 1000000);

// A pair of approximate right limits that branch at n = 0: two preimages
// x != x~ of c under f^ell with an observable gap, each approached by the
// orbit prefix. The windows agree for n >= ell (both forward images pass
// through c) and differ at n = 0 by nearly |x - x~|.
struct WitnessPair {
    double x = 0, x_tilde = 0;
    std::size_t ell = 0;
    double phi_gap = 0; // |phi(x) - phi(x_tilde)|
    RightLimitWindow window, window_tilde;
};

struct WitnessResult {
    std::optional<WitnessPair> pair;
    std::string note; // reason when no pair was found
};

// Searches preimage levels l = 1, 2, ... for a pair with
// |phi(x) - phi(x~)| > delta_search both approached by the orbit prefix.
// The approach radius starts at delta_search / 4 and halves while both
// targets keep at least two prefix hits, so the reported windows use the
// tightest radius the prefix supports.
WitnessResult breuer_simon_witness(const UnimodalMap& map,
                                   const PostcriticalOrbit& orbit,
                                   const Observable& phi, double delta_search,
                                   std::size_t max_level = 8);

// Max observable gap over preimage pairs: zero (up to rounding) exactly for
// f-symmetric observables.
struct SymmetryVerdict {
    double max_gap = 0;
    double y = 0;          // image point realizing the max
    double x = 0, x_tilde = 0;
};

SymmetryVerdict f_symmetry_check(const UnimodalMap& map, const Observable& phi,
                                 std::size_t samples = 1000);

} // namespace suscept
