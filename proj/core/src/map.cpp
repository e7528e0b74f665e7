#include "suscept/map.hpp"
#include "suscept/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <unordered_map>

namespace suscept {

namespace {

double horner(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;)
        acc = acc * x + coeffs[i];
    return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
    std::vector<double> d;
    for (std::size_t k = 1; k < coeffs.size(); ++k)
        d.push_back(coeffs[k] * static_cast<double>(k));
    if (d.empty()) d.push_back(0.0);
    return d;
}

Branch affine_branch(double lo, double hi, double m, double q) {
    Branch br;
    br.lo = lo;
    br.hi = hi;
    br.affine = true;
    br.m = m;
    br.q = q;
    br.f = [m, q](double x) { return q + m * x; };
    br.df = [m](double) { return m; };
    br.d2f = [](double) { return 0.0; };
    return br;
}

Branch poly_branch(double lo, double hi, const std::vector<double>& coeffs) {
    if (coeffs.size() == 2) // degree-1 polynomial: keep the exact inverse
        return affine_branch(lo, hi, coeffs[1], coeffs[0]);
    auto c0 = std::make_shared<std::vector<double>>(coeffs);
    auto c1 = std::make_shared<std::vector<double>>(poly_derivative(*c0));
    auto c2 = std::make_shared<std::vector<double>>(poly_derivative(*c1));
    Branch br;
    br.lo = lo;
    br.hi = hi;
    br.f = [c0](double x) { return horner(*c0, x); };
    br.df = [c1](double x) { return horner(*c1, x); };
    br.d2f = [c2](double x) { return horner(*c2, x); };
    return br;
}

constexpr int kGridSamples = 10000;

// Minimum of |f'| over the branch, by grid sampling plus refinement of the
// interior stationary points of f' (sign changes of f'').
double branch_min_abs_slope(const Branch& br, double* argmin) {
    double best = std::numeric_limits<double>::infinity();
    double bx = br.lo;
    const double span = br.hi - br.lo;
    double prev_d2 = br.d2f(br.lo);
    double prev_x = br.lo;
    for (int i = 0; i <= kGridSamples; ++i) {
        const double x = br.lo + span * i / kGridSamples;
        const double s = std::abs(br.df(x));
        if (s < best) { best = s; bx = x; }
        const double d2 = br.d2f(x);
        if (i > 0 && ((prev_d2 < 0 && d2 > 0) || (prev_d2 > 0 && d2 < 0))) {
            // bisect for the stationary point of f'
            double u = prev_x, v = x, fu = prev_d2;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (u + v);
                const double fm = br.d2f(mid);
                if ((fu < 0) == (fm < 0)) { u = mid; fu = fm; } else { v = mid; }
            }
            const double xs = 0.5 * (u + v);
            const double s2 = std::abs(br.df(xs));
            if (s2 < best) { best = s2; bx = xs; }
        }
        prev_d2 = d2;
        prev_x = x;
    }
    if (argmin) *argmin = bx;
    return best;
}

void validate_and_finish(UnimodalMap& map) {
    const double scale = map.b - map.a;
    const double tol = 1e-12 * std::max(1.0, scale);

    if (!(map.a < map.c && map.c < map.b))
        throw EndpointViolated("turning point must lie strictly inside (a, b)");

    const double at_c_left = map.left.f(map.c);
    const double at_c_right = map.right.f(map.c);
    if (std::abs(at_c_left - at_c_right) > tol)
        throw DiscontinuousAtC(at_c_left, at_c_right);

    if (std::abs(map.left.f(map.a) - map.a) > tol)
        throw EndpointViolated("f(a) != a");
    if (std::abs(map.right.f(map.b) - map.a) > tol)
        throw EndpointViolated("f(b) != a");

    // Expansion: f' > 1 on the left branch, f' < -1 on the right branch.
    for (int i = 0; i <= kGridSamples; ++i) {
        const double xl = map.a + (map.c - map.a) * i / kGridSamples;
        const double dl = map.left.df(xl);
        if (!(dl > 1.0))
            throw ExpansionViolated(xl, dl);
        const double xr = map.c + (map.b - map.c) * i / kGridSamples;
        const double dr = map.right.df(xr);
        if (!(dr < -1.0))
            throw ExpansionViolated(xr, dr);
    }

    double xm_l = 0, xm_r = 0;
    const double min_l = branch_min_abs_slope(map.left, &xm_l);
    const double min_r = branch_min_abs_slope(map.right, &xm_r);
    if (!(min_l > 1.0)) throw ExpansionViolated(xm_l, min_l);
    if (!(min_r > 1.0)) throw ExpansionViolated(xm_r, -min_r);
    map.lambda = std::min(min_l, min_r);

    double sup = 0.0;
    for (int i = 0; i <= kGridSamples; ++i) {
        sup = std::max(sup, std::abs(map.left.df(map.a + (map.c - map.a) * i / kGridSamples)));
        sup = std::max(sup, std::abs(map.right.df(map.c + (map.b - map.c) * i / kGridSamples)));
    }
    map.sup_slope = sup;

    map.c1 = map.left.f(map.c);
    map.c2 = map.eval(map.c1);
    if (!(map.c2 < map.c1 - tol))
        throw EndpointViolated("degenerate trapping interval: c2 >= c1");
    if (!(map.c2 <= map.c + tol && map.c <= map.c1 + tol))
        throw EndpointViolated("turning point outside trapping interval [c2, c1]");
    // Trapping: the image of [c2, c1] is [min(f(c2), f(c1)), c1].
    if (std::min(map.eval(map.c2), map.eval(map.c1)) < map.c2 - tol)
        throw EndpointViolated("[c2, c1] is not forward invariant");
}

} // namespace

double Branch::invert(double y) const {
    if (affine)
        return (y - q) / m;
    // Monotone bracketed bisection, then a Newton polish.
    double u = lo, v = hi;
    double fu = f(u) - y, fv = f(v) - y;
    if (fu == 0) return u;
    if (fv == 0) return v;
    if ((fu < 0) == (fv < 0)) {
        // y outside the branch image; clamp to the nearer endpoint.
        return std::abs(fu) < std::abs(fv) ? u : v;
    }
    for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (u + v);
        const double fm = f(mid) - y;
        if (fm == 0) { u = v = mid; break; }
        if ((fm < 0) == (fu < 0)) { u = mid; fu = fm; } else { v = mid; }
    }
    double x = 0.5 * (u + v);
    for (int it = 0; it < 3; ++it) {
        const double d = df(x);
        if (d == 0) break;
        x -= (f(x) - y) / d;
        x = std::clamp(x, lo, hi);
    }
    return x;
}

double branch_invert(const Branch& br, double y) { return br.invert(y); }

UnimodalMap build_map(const MapSpec& spec) {
    if (!(spec.a < spec.b))
        throw EndpointViolated("need a < b");
    UnimodalMap map;
    map.spec = spec;
    map.a = spec.a;
    map.b = spec.b;

    if (const auto* tent = std::get_if<TentParams>(&spec.family)) {
        const double s = tent->slope;
        if (!(s > 1.0 && s <= 2.0))
            throw ConfigError("tent slope must lie in (1, 2]");
        map.c = 0.5 * (spec.a + spec.b);
        // f(x) = a + s*(x - a) rising, a + s*(b - x) falling
        map.left = affine_branch(spec.a, map.c, s, spec.a * (1.0 - s));
        map.right = affine_branch(map.c, spec.b, -s, spec.a + s * spec.b);
        map.exact_orbit = (s == 2.0 && spec.a == 0.0 && spec.b == 1.0);
    } else if (const auto* skew = std::get_if<SkewedTentParams>(&spec.family)) {
        const double c = skew->c, h = skew->h;
        if (!(spec.a < c && c < spec.b))
            throw ConfigError("skewed tent turning point must lie in (a, b)");
        if (!(h > 0.0 && h <= 1.0))
            throw ConfigError("skewed tent peak height must lie in (0, 1]");
        map.c = c;
        const double peak = spec.a + h * (spec.b - spec.a);
        const double ml = (peak - spec.a) / (c - spec.a);
        const double mr = (peak - spec.a) / (spec.b - c);
        map.left = affine_branch(spec.a, c, ml, spec.a - ml * spec.a);
        map.right = affine_branch(c, spec.b, -mr, spec.a + mr * spec.b);
    } else {
        const auto& poly = std::get<PolyParams>(spec.family);
        if (poly.left.empty() || poly.right.empty())
            throw ConfigError("polynomial branches need coefficients");
        map.c = poly.c;
        map.left = poly_branch(spec.a, poly.c, poly.left);
        map.right = poly_branch(poly.c, spec.b, poly.right);
    }

    validate_and_finish(map);
    return map;
}

UnimodalMap build_map_from_callables(double a, double b, double c,
                                     BranchFns left, BranchFns right,
                                     const MapSpec& provenance) {
    UnimodalMap map;
    map.spec = provenance;
    map.a = a;
    map.b = b;
    map.c = c;
    map.left.lo = a;
    map.left.hi = c;
    map.left.f = std::move(left.f);
    map.left.df = std::move(left.df);
    map.left.d2f = std::move(left.d2f);
    map.right.lo = c;
    map.right.hi = b;
    map.right.f = std::move(right.f);
    map.right.df = std::move(right.df);
    map.right.d2f = std::move(right.d2f);
    validate_and_finish(map);
    return map;
}

PostcriticalOrbit postcritical_orbit(const UnimodalMap& map, std::size_t K) {
    PostcriticalOrbit orbit;
    orbit.points.reserve(K);
    orbit.slopes.reserve(K);
    orbit.derivs.reserve(K > 0 ? K - 1 : 0);

    double x = map.c1;
    orbit.points.push_back(x);
    orbit.slopes.push_back(map.deriv(x));
    double D = 1.0;
    for (std::size_t k = 1; k < K; ++k) {
        D *= orbit.slopes.back(); // f'(c_k), accumulated in orbit order
        orbit.derivs.push_back(D);
        x = map.eval(x);
        orbit.points.push_back(x);
        orbit.slopes.push_back(map.deriv(x));
    }

    // Exact-revisit scan (first repeated value wins: minimal preperiod).
    {
        std::unordered_map<double, std::size_t> seen;
        for (std::size_t j = 0; j < orbit.points.size(); ++j) {
            auto [it, fresh] = seen.try_emplace(orbit.points[j], j);
            if (!fresh) {
                Preperiodicity pp;
                pp.preperiod = it->second + 1; // m: c_m is the first revisited point
                pp.period = j - it->second;
                pp.proven = map.exact_orbit;
                // Rounding can close a shorter cycle into a longer bitwise
                // one (a nearly fixed tail alternating between neighbouring
                // doubles). When the orbit is not exact, report the smallest
                // divisor period that holds within tolerance instead.
                if (!pp.proven) {
                    for (std::size_t q = 1; q < pp.period; ++q) {
                        if (pp.period % q != 0) continue;
                        bool close = true;
                        for (std::size_t i = 0; close && i < pp.period; ++i) {
                            const double u = orbit.c(pp.preperiod + i);
                            const double v =
                                orbit.c(pp.preperiod + (i + q) % pp.period);
                            close = std::abs(v - u) <= 1e-13;
                        }
                        if (close) {
                            pp.period = q;
                            break;
                        }
                    }
                }
                orbit.preperiod = pp;
                return orbit;
            }
        }
    }

    // Tolerance-based scan on a bounded prefix, with a persistence check that
    // allows errors to grow at the expansion rate.
    const std::size_t cap = std::min<std::size_t>(orbit.points.size(), 4096);
    const double tol = 1e-13;
    for (std::size_t m = 1; m <= cap; ++m) {
        for (std::size_t p = 1; m + p <= cap; ++p) {
            if (std::abs(orbit.c(m + p) - orbit.c(m)) > tol)
                continue;
            bool persists = true;
            double allow = tol;
            for (std::size_t i = 1; i <= 10 && m + p + i <= orbit.points.size(); ++i) {
                allow *= map.sup_slope;
                if (std::abs(orbit.c(m + p + i) - orbit.c(m + i)) > allow) {
                    persists = false;
                    break;
                }
            }
            if (persists) {
                orbit.preperiod = Preperiodicity{m, p, false};
                return orbit;
            }
        }
    }
    return orbit;
}

std::vector<double> preimages(const UnimodalMap& map, double y) {
    const double tol = 1e-12 * std::max(1.0, map.b - map.a);
    std::vector<double> out;
    if (y >= map.a - tol && y <= map.c1 + tol) {
        const double xl = map.left.invert(std::clamp(y, map.a, map.c1));
        if (xl >= map.c2 - tol && xl <= map.c1 + tol)
            out.push_back(std::clamp(xl, map.c2, map.c1));
        const double xr = map.right.invert(std::clamp(y, map.a, map.c1));
        if (xr >= map.c2 - tol && xr <= map.c1 + tol) {
            const double x = std::clamp(xr, map.c2, map.c1);
            if (out.empty() || std::abs(x - out.back()) > tol)
                out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

PrecriticalOrbit precritical_orbit(const UnimodalMap& map,
                                   const std::vector<std::uint8_t>& bits,
                                   std::size_t M) {
    if (M == 0)
        throw ConfigError("precritical orbit depth must be at least 1");
    if (bits.size() + 1 < M)
        throw ConfigError("need at least M-1 branch bits");
    const double tol = 1e-12 * std::max(1.0, map.b - map.a);
    PrecriticalOrbit orbit;
    orbit.points.reserve(M);
    orbit.points.push_back(map.c); // y_{-1}
    for (std::size_t step = 0; step + 1 < M; ++step) {
        const double target = orbit.points.back();
        const Branch& br = bits[step] ? map.right : map.left;
        // target must lie in the branch image [a, c1]
        if (target < map.a - tol || target > map.c1 + tol)
            throw BranchUnavailable(step + 2);
        const double x = br.invert(std::clamp(target, map.a, map.c1));
        if (x < map.c2 - tol || x > map.c1 + tol)
            throw BranchUnavailable(step + 2);
        orbit.points.push_back(std::clamp(x, map.c2, map.c1));
        orbit.bits.push_back(bits[step]);
    }
    return orbit;
}

} // namespace suscept
