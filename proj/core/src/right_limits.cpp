#include "suscept/right_limits.hpp"

#include "suscept/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace suscept {

RightLimitWindow window_at_indices(const PostcriticalOrbit& orbit,
                                   std::vector<std::size_t> centers, long W) {
    if (centers.empty()) throw ConfigError("window needs at least one center index");
    if (W < 0) throw ConfigError("window half-width must be nonnegative");
    std::sort(centers.begin(), centers.end());
    const std::size_t span = static_cast<std::size_t>(W);
    for (std::size_t k : centers) {
        if (k < span || k + span >= orbit.points.size())
            throw OrbitTooShort(orbit.points.size(), k + span + 1);
    }

    RightLimitWindow win;
    win.half_width = W;
    const std::size_t last = centers.back();
    const std::size_t prev = centers.size() > 1 ? centers[centers.size() - 2] : last;
    for (long n = -W; n <= W; ++n) {
        const double bv = orbit.points[static_cast<std::size_t>(static_cast<long>(last) + n)];
        const double pv = orbit.points[static_cast<std::size_t>(static_cast<long>(prev) + n)];
        win.values.push_back(bv);
        win.gaps.push_back(std::abs(bv - pv));
    }
    win.centers = std::move(centers);
    return win;
}

RightLimitWindow glue_renascent(const PostcriticalOrbit& orbit,
                                const PrecriticalOrbit& pre, long W) {
    if (W < 0) throw ConfigError("window half-width must be nonnegative");
    if (orbit.points.size() < static_cast<std::size_t>(W) + 1)
        throw OrbitTooShort(orbit.points.size(), static_cast<std::size_t>(W) + 1);
    if (pre.depth() < static_cast<std::size_t>(W))
        throw OrbitTooShort(pre.depth(), static_cast<std::size_t>(W));

    RightLimitWindow win;
    win.half_width = W;
    for (long n = -W; n <= W; ++n) {
        win.values.push_back(n < 0 ? pre.y(n)
                                   : orbit.points[static_cast<std::size_t>(n)]);
        win.gaps.push_back(0.0);
    }
    return win;
}

OrbitCheckVerdict complete_orbit_check(const UnimodalMap& map,
                                       const RightLimitWindow& window) {
    OrbitCheckVerdict verdict;
    const long W = window.half_width;
    for (long n = -W; n < W; ++n) {
        const double dev = std::abs(map.eval(window.b(n)) - window.b(n + 1));
        const double allowed =
            std::max({window.gap(n), window.gap(n + 1), 1e-9});
        if (dev > allowed) {
            // report against both entries of the offending pair
            verdict.violations.push_back({n, dev, allowed});
            verdict.violations.push_back({n + 1, dev, allowed});
            verdict.pass = false;
        }
    }
    return verdict;
}

namespace {

// Left/right pull-back of `target` staying inside [c2, c1]; nullopt when the
// selected branch cannot produce it.
std::optional<double> pull_back(const UnimodalMap& map, double target, bool right) {
    const double tol = 1e-12 * std::max(1.0, map.b - map.a);
    if (target < map.a - tol || target > map.c1 + tol) return std::nullopt;
    const Branch& br = right ? map.right : map.left;
    const double x = br.invert(std::clamp(target, map.a, map.c1));
    if (x < map.c2 - tol || x > map.c1 + tol) return std::nullopt;
    // reject silent clamping: the preimage must actually map back
    if (std::abs(br.f(std::clamp(x, br.lo, br.hi)) - std::clamp(target, map.a, map.c1)) >
        1e-9 * std::max(1.0, map.b - map.a))
        return std::nullopt;
    return std::clamp(x, map.c2, map.c1);
}

} // namespace

PrecriticalTree enumerate_precritical(const UnimodalMap& map, std::size_t M,
                                      std::size_t cap) {
    if (M == 0) throw ConfigError("enumeration depth must be at least 1");
    if (cap == 0) throw ConfigError("enumeration cap must be positive");

    PrecriticalTree tree;
    tree.depth = M;

    std::vector<PrecriticalOrbit> frontier;
    PrecriticalOrbit root;
    root.points.push_back(map.c); // y_{-1} = c
    frontier.push_back(std::move(root));
    tree.branch_counts.push_back(frontier.size());

    for (std::size_t depth = 1; depth < M; ++depth) {
        std::vector<PrecriticalOrbit> next;
        for (const PrecriticalOrbit& po : frontier) {
            if (next.size() >= cap) {
                tree.truncated = true;
                break;
            }
            for (int bit = 0; bit < 2; ++bit) {
                const auto x = pull_back(map, po.points.back(), bit == 1);
                if (!x) continue;
                if (next.size() >= cap) {
                    tree.truncated = true;
                    break;
                }
                PrecriticalOrbit ext = po;
                ext.points.push_back(*x);
                ext.bits.push_back(static_cast<std::uint8_t>(bit));
                next.push_back(std::move(ext));
            }
        }
        frontier = std::move(next);
        tree.branch_counts.push_back(frontier.size());
        if (frontier.empty()) break;
    }

    const double lower = std::pow(2.0, std::floor(static_cast<double>(M) / 2.0));
    tree.two_choice_bound_met =
        static_cast<double>(tree.branch_counts.back()) >=
        std::min(static_cast<double>(cap), lower);
    tree.orbits = std::move(frontier);
    return tree;
}

PrecriticalOrbit sample_precritical(const UnimodalMap& map, const UlamOperator& op,
                                    const AcimDensity& density, std::size_t M,
                                    std::uint64_t seed) {
    if (M == 0) throw ConfigError("precritical orbit depth must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const auto rho_at = [&](double x) {
        const double t = (x - op.a) / op.h();
        const std::size_t i = std::min<std::size_t>(
            op.n_cells - 1,
            static_cast<std::size_t>(std::max(0.0, std::floor(t))));
        return std::max(density.rho[i], 0.0);
    };

    PrecriticalOrbit orbit;
    orbit.points.push_back(map.c);
    for (std::size_t step = 0; step + 1 < M; ++step) {
        const double target = orbit.points.back();
        const auto xl = pull_back(map, target, false);
        const auto xr = pull_back(map, target, true);
        if (!xl && !xr) throw BranchUnavailable(step + 2);
        bool right;
        if (xl && xr) {
            const double wl = rho_at(*xl) / std::abs(map.deriv(*xl));
            const double wr = rho_at(*xr) / std::abs(map.deriv(*xr));
            const double total = wl + wr;
            right = total > 0.0 ? unif(rng) * total >= wl : unif(rng) >= 0.5;
        } else {
            right = static_cast<bool>(xr);
        }
        orbit.points.push_back(right ? *xr : *xl);
        orbit.bits.push_back(right ? 1 : 0);
    }
    return orbit;
}

BirkhoffDiagnostic birkhoff_precritical_check(const PrecriticalOrbit& pre,
                                              const Observable& phi, cplx mean,
                                              std::size_t m, double tol) {
    if (pre.depth() < m) throw OrbitTooShort(pre.depth(), m);
    if (m == 0) throw ConfigError("Birkhoff check needs at least one term");
    cplx acc = 0.0;
    for (std::size_t j = 1; j <= m; ++j)
        acc += phi.f(pre.y(-static_cast<long>(j)));
    BirkhoffDiagnostic diag;
    diag.m = m;
    diag.deviation = std::abs(acc / static_cast<double>(m) - mean);
    diag.pass = diag.deviation <= tol;
    return diag;
}

CoveringDepth covering_depth(const UnimodalMap& map, double x0, double eps,
                             std::size_t point_budget) {
    if (!(x0 > map.c2 && x0 < map.c1))
        throw OutsideDomain("covering depth seed must lie inside (c2, c1)");
    if (!(eps > 0)) throw ConfigError("covering depth needs eps > 0");

    const double merge_tol = 1e-12 * std::max(1.0, map.b - map.a);
    const auto dense = [&](const std::vector<double>& pts) {
        if (pts.empty()) return false;
        if (pts.front() - map.c2 > eps) return false;
        if (map.c1 - pts.back() > eps) return false;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            if (0.5 * (pts[i + 1] - pts[i]) > eps) return false;
        return true;
    };

    std::vector<double> pts{x0};
    for (std::size_t depth = 0;; ++depth) {
        if (dense(pts)) return {depth, std::move(pts)};
        std::vector<double> next;
        next.reserve(2 * pts.size());
        for (double y : pts)
            for (double x : preimages(map, y))
                next.push_back(x);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end(),
                               [&](double u, double v) { return std::abs(u - v) <= merge_tol; }),
                   next.end());
        if (next.size() > point_budget || next.empty())
            throw DepthBudgetExceeded(depth + 1, next.size());
        pts = std::move(next);
    }
}

WitnessResult breuer_simon_witness(const UnimodalMap& map,
                                   const PostcriticalOrbit& orbit,
                                   const Observable& phi, double delta_search,
                                   std::size_t max_level) {
    WitnessResult result;
    if (orbit.preperiod) {
        result.note = "finite postcritical orbit: prefix cannot approach generic preimages";
        return result;
    }
    if (orbit.points.size() < 10000) {
        result.note = "orbit prefix shorter than 10^4";
        return result;
    }

    // Level sets f^{-l}(c), built by repeated preimages of the turning point.
    std::vector<double> level{map.c};
    bool found_gap_pair = false;
    for (std::size_t ell = 1; ell <= max_level; ++ell) {
        std::vector<double> next;
        for (double y : level)
            for (double x : preimages(map, y))
                next.push_back(x);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        level = std::move(next);
        if (level.size() < 2) continue;

        // candidate pairs with an observable gap, widest gap first
        struct Cand {
            double x, xt, gap;
        };
        std::vector<Cand> cands;
        for (std::size_t i = 0; i < level.size(); ++i)
            for (std::size_t j = i + 1; j < level.size(); ++j) {
                const double g = std::abs(phi.f(level[i]) - phi.f(level[j]));
                if (g > delta_search) cands.push_back({level[i], level[j], g});
            }
        if (cands.empty()) continue;
        found_gap_pair = true;
        std::sort(cands.begin(), cands.end(),
                  [](const Cand& u, const Cand& v) { return u.gap > v.gap; });

        const long W = static_cast<long>(ell);
        const std::size_t span = static_cast<std::size_t>(W);
        for (const Cand& cand : cands) {
            // best two prefix hits per target, over indices where the window fits
            struct Best {
                std::size_t k1 = 0, k2 = 0;
                double d1 = std::numeric_limits<double>::infinity();
                double d2 = std::numeric_limits<double>::infinity();
                void offer(std::size_t k, double d) {
                    if (d < d1) {
                        k2 = k1; d2 = d1;
                        k1 = k; d1 = d;
                    } else if (d < d2) {
                        k2 = k; d2 = d;
                    }
                }
            } hit, hit_t;
            for (std::size_t k = span; k + span < orbit.points.size(); ++k) {
                const double p = orbit.points[k];
                hit.offer(k, std::abs(p - cand.x));
                hit_t.offer(k, std::abs(p - cand.xt));
            }
            // radius schedule: delta/4, halved while both targets keep two hits
            double radius = delta_search / 4.0;
            if (!(hit.d2 <= radius && hit_t.d2 <= radius)) continue;
            while (hit.d2 <= radius / 2.0 && hit_t.d2 <= radius / 2.0) radius /= 2.0;

            WitnessPair pair;
            pair.x = cand.x;
            pair.x_tilde = cand.xt;
            pair.ell = ell;
            pair.phi_gap = cand.gap;
            pair.window = window_at_indices(orbit, {hit.k2, hit.k1}, W);
            pair.window_tilde = window_at_indices(orbit, {hit_t.k2, hit_t.k1}, W);
            result.pair = std::move(pair);
            return result;
        }
    }
    result.note = found_gap_pair
                      ? "orbit prefix never approaches both preimages of a gap pair"
                      : "no preimage pair with observable gap above threshold";
    return result;
}

SymmetryVerdict f_symmetry_check(const UnimodalMap& map, const Observable& phi,
                                 std::size_t samples) {
    SymmetryVerdict verdict;
    for (std::size_t i = 0; i < samples; ++i) {
        const double y = map.c2 + (map.c1 - map.c2) *
                                      (static_cast<double>(i) + 0.5) /
                                      static_cast<double>(samples);
        const auto pre = preimages(map, y);
        if (pre.size() < 2) continue;
        const double gap = std::abs(phi.f(pre.front()) - phi.f(pre.back()));
        if (gap > verdict.max_gap) {
            verdict.max_gap = gap;
            verdict.y = y;
            verdict.x = pre.front();
            verdict.x_tilde = pre.back();
        }
    }
    return verdict;
}

} // namespace suscept
