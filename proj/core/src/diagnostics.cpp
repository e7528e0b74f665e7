#include "suscept/diagnostics.hpp"

#include "suscept/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace suscept {

namespace {

struct KahanSum {
    cplx sum{0.0, 0.0};
    cplx comp{0.0, 0.0};

    void add(cplx x) {
        const cplx y = x - comp;
        const cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// least-squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

double frac(double x) { return x - std::floor(x); }

} // namespace

double SectorSpec::cs() const { return 1.0 / std::cos(half_aperture); }

std::vector<cplx> SectorSpec::points() const {
    if (j_lo < 1 || j_hi < j_lo)
        throw ConfigError("sector needs 1 <= j_lo <= j_hi");
    std::vector<cplx> out;
    for (int j = j_lo; j <= j_hi; ++j)
        out.push_back((1.0 - std::pow(2.0, -j)) * std::polar(1.0, omega));
    return out;
}

ScanReport radial_scan(const Evaluator& eval, double omega_lo, double omega_hi,
                       const std::vector<double>& radii,
                       std::size_t initial_panels) {
    if (!(omega_lo < omega_hi)) throw ConfigError("radial scan needs omega_lo < omega_hi");
    if (radii.empty()) throw ConfigError("radial scan needs at least one radius");
    if (initial_panels < 4) initial_panels = 4;

    ScanReport report;
    report.kind = "radial-scan";

    for (double r : radii) {
        if (!(r < 1.0)) throw OutsideDomain("radial scan radii must satisfy r < 1");
        double integral = 0.0, tail_max = 0.0;
        std::size_t panels = initial_panels;
        double prev = std::numeric_limits<double>::infinity();
        for (;;) {
            double acc = 0.0;
            tail_max = 0.0;
            const double width = (omega_hi - omega_lo) / static_cast<double>(panels);
            for (std::size_t p = 0; p < panels; ++p) {
                const double w = omega_lo + width * (static_cast<double>(p) + 0.5);
                const SeriesValue v = eval(std::polar(r, w));
                acc += std::abs(v.value);
                tail_max = std::max(tail_max, v.tail);
            }
            integral = acc * width;
            if (std::abs(integral - prev) < 0.01 * std::abs(integral) || panels >= 65536)
                break;
            prev = integral;
            panels *= 2;
        }
        report.samples.push_back({r, integral, tail_max});
    }

    // growth requires the last four consecutive ratios to exceed 1.05
    bool growth = report.samples.size() >= 5;
    if (growth) {
        for (std::size_t i = report.samples.size() - 4; i < report.samples.size(); ++i) {
            const double prev = std::abs(report.samples[i - 1].value);
            const double cur = std::abs(report.samples[i].value);
            if (!(prev > 0.0) || cur / prev < 1.05) {
                growth = false;
                break;
            }
        }
    }
    report.verdict = growth ? "growth-consistent-with-strong-boundary" : "bounded";

    std::vector<double> lx, ly;
    for (const auto& s : report.samples)
        if (std::abs(s.value) > 0.0) {
            lx.push_back(std::log(1.0 - s.x));
            ly.push_back(std::log(std::abs(s.value)));
        }
    if (lx.size() >= 2) report.slope = fit_slope(lx, ly);
    return report;
}

ScanReport nontangential_limit(const Evaluator& eval, const SectorSpec& sector,
                               NtWeight weight) {
    ScanReport report;
    report.kind = sector.outer ? "nt-limit-outer" : "nt-limit-inner";
    const cplx target = std::polar(1.0, sector.outer ? -sector.omega : sector.omega);

    for (const cplx& z : sector.points()) {
        const cplx arg = sector.outer ? 1.0 / z : z;
        SeriesValue v = eval(arg);
        if (weight == NtWeight::PoleFactor) {
            const cplx factor = arg - target;
            v.value *= factor;
            v.tail *= std::abs(factor);
        }
        report.samples.push_back({std::abs(z), v.value, v.tail});
    }

    const std::size_t n = report.samples.size();
    if (n < 3) throw ConfigError("nontangential extrapolation needs at least three radii");
    const cplx v3 = report.samples[n - 1].value;
    const cplx v2 = report.samples[n - 2].value;
    const cplx v1 = report.samples[n - 3].value;
    report.limit = v3;
    report.err = std::abs(v3 - v2) + report.samples[n - 1].aux;
    report.verdict = std::abs(v3 - v2) <= std::abs(v2 - v1) + 1e-14
                         ? "converged"
                         : "not-converged";
    return report;
}

WwReport wiener_wintner_check(const PostcriticalOrbit& orbit,
                              const Observable& phi,
                              const std::vector<double>& omegas,
                              const std::vector<std::size_t>& ms) {
    if (ms.empty()) throw ConfigError("Wiener-Wintner check needs checkpoints");
    std::vector<std::size_t> checks = ms;
    std::sort(checks.begin(), checks.end());
    const std::size_t m_max = checks.back();
    if (orbit.points.size() < m_max) throw OrbitTooShort(orbit.points.size(), m_max);

    WwReport report;
    report.all_decaying = true;
    for (double omega : omegas) {
        RotationStream rot(omega);
        KahanSum acc;
        std::size_t next = 0;
        std::vector<double> values;
        for (std::size_t k = 0; k < m_max; ++k) {
            acc.add(rot.next() * phi.f(orbit.points[k]));
            while (next < checks.size() && k + 1 == checks[next]) {
                const double mod = std::abs(acc.sum) / static_cast<double>(k + 1);
                report.samples.push_back({omega, k + 1, mod});
                values.push_back(mod);
                ++next;
            }
        }
        std::string verdict;
        if (omega == 0.0 && !phi.mean_normalized) {
            verdict = "mean-not-removed";
        } else {
            // compare the first and last checkpoints of the final decade
            double first = 0, last = 0;
            bool have = false;
            for (std::size_t i = 0; i < checks.size(); ++i) {
                if (checks[i] * 10 >= m_max) {
                    if (!have) { first = values[i]; have = true; }
                    last = values[i];
                }
            }
            verdict = (have && last * 2.0 <= first) ? "decaying" : "not-decaying";
        }
        if (verdict != "decaying") report.all_decaying = false;
        report.per_omega_verdicts.push_back(verdict);
    }
    return report;
}

double van_der_corput_slack(const std::vector<cplx>& u, std::size_t n,
                            std::size_t h) {
    if (n > u.size()) throw ConfigError("van der Corput: n exceeds the sequence length");
    if (h < 1 || h + 1 > n) throw ConfigError("van der Corput needs 1 <= h <= n-1");

    KahanSum full;
    double norms = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        full.add(u[k]);
        norms += std::norm(u[k]);
    }
    const double lhs = std::norm(full.sum);

    const double hp1 = static_cast<double>(h + 1);
    const double lead = static_cast<double>(n + h) / hp1;
    double corr = 0.0;
    for (std::size_t r = 1; r <= h; ++r) {
        KahanSum inner;
        for (std::size_t k = 0; k + r < n; ++k)
            inner.add(u[k + r] * std::conj(u[k]));
        corr += (hp1 - static_cast<double>(r)) * std::abs(inner.sum);
    }
    const double rhs = lead * norms + 2.0 * lead / hp1 * corr;
    return rhs - lhs;
}

ScanReport lil_ratio(const PostcriticalOrbit& orbit, const Observable& phi,
                     double omega, const std::vector<std::size_t>& ms) {
    ScanReport report;
    report.kind = "lil-ratio";
    std::vector<std::size_t> checks;
    for (std::size_t m : ms)
        if (m >= 3) checks.push_back(m);
    if (checks.empty()) throw ConfigError("LIL ratio needs checkpoints m >= 3");
    std::sort(checks.begin(), checks.end());
    const std::size_t m_max = checks.back();
    if (orbit.points.size() < m_max) throw OrbitTooShort(orbit.points.size(), m_max);

    RotationStream rot(omega);
    KahanSum acc;
    double running = 0.0;
    std::size_t arg_running = 0;
    std::size_t next = 0;
    for (std::size_t k = 0; k < m_max; ++k) {
        acc.add(rot.next() * phi.f(orbit.points[k]));
        while (next < checks.size() && k + 1 == checks[next]) {
            const double m = static_cast<double>(k + 1);
            const double ratio = std::abs(acc.sum) / std::sqrt(m * std::log(std::log(m)));
            if (ratio > running) {
                running = ratio;
                arg_running = k + 1;
            }
            report.samples.push_back({m, ratio, running});
            ++next;
        }
    }
    report.limit = running;
    report.verdict = arg_running * 10 <= m_max ? "plateaued" : "still-growing";
    return report;
}

ScanReport lil_envelope_check(const std::vector<double>& radii) {
    ScanReport report;
    report.kind = "lil-envelope";
    std::vector<double> lx, ly, ratios;

    for (double r : radii) {
        if (!(r >= 0.9 && r < 1.0))
            throw ConfigError("LIL envelope radii must lie in [0.9, 1)");
        // direct summation of sum_{k>=3} r^{k-1} sqrt(k log log k)
        double acc = 0.0;
        double rk = r * r; // r^{k-1} at k = 3
        double term = 0.0;
        std::size_t k = 3;
        for (;; ++k) {
            term = rk * std::sqrt(static_cast<double>(k) *
                                  std::log(std::log(static_cast<double>(k))));
            acc += term;
            rk *= r;
            if (term < 1e-13 * acc &&
                static_cast<double>(k) * (1.0 - r) > 40.0)
                break;
        }
        const double q = r * (1.0 + 1.0 / static_cast<double>(k));
        const double tail = q < 1.0 ? term * q / (1.0 - q)
                                    : std::numeric_limits<double>::infinity();
        if (!(tail < 1e-6 * acc))
            throw TailUnreachable("LIL envelope tail did not certify at r = " +
                                  std::to_string(r));
        report.samples.push_back({r, acc, tail});
        lx.push_back(std::log(1.0 - r));
        ly.push_back(std::log(acc));
    }

    report.slope = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;

    double M = 0.0;
    for (const auto& s : report.samples) {
        const double env = std::pow(1.0 - s.x, -1.5) *
                           std::sqrt(std::log(std::log(1.0 / (1.0 - s.x))));
        M = std::max(M, std::abs(s.value) / env);
    }
    report.limit = M;
    for (auto& s : report.samples) {
        const double env = std::pow(1.0 - s.x, -1.5) *
                           std::sqrt(std::log(std::log(1.0 / (1.0 - s.x))));
        s.aux = std::abs(s.value) / (M * env);
    }
    report.verdict = (report.slope >= -1.6 && report.slope <= -1.4)
                         ? "envelope-consistent"
                         : "envelope-inconsistent";
    return report;
}

ScanReport sector_bound_fit(const std::vector<std::pair<cplx, cplx>>& samples,
                            double omega) {
    ScanReport report;
    report.kind = "sector-bound-fit";
    const cplx vertex = std::polar(1.0, omega);
    double C = 0.0;
    for (const auto& [z, value] : samples) {
        const double d = std::abs(z - vertex);
        if (!(d > 0.0 && d < 1.0)) continue;
        const double ll = std::max(std::log(std::log(1.0 / d)), 0.1);
        const double weight = std::sqrt(ll / d);
        const double ratio = std::abs(value) / weight;
        report.samples.push_back({d, value, ratio});
        C = std::max(C, ratio);
    }
    report.limit = C;
    // err is the min/max spread of the per-sample constants; near 1 means the
    // bound is saturated uniformly, near 0 means C is driven by one outlier
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : report.samples) lo = std::min(lo, s.aux);
    report.err = (C > 0.0 && !report.samples.empty()) ? lo / C : 0.0;
    report.verdict = "fitted";
    return report;
}

SeriesValue hecke_reference(double theta, cplx z, std::size_t K) {
    const double r = std::abs(z);
    if (!(r < 1.0))
        throw OutsideDomain("the reference series converges in |z| < 1 only");
    if (K == 0) throw ConfigError("need at least one term");
    KahanSum acc;
    cplx zk = 1.0;
    double t = 0.0; // {k theta}
    for (std::size_t k = 0; k < K; ++k) {
        acc.add((t - 0.5) * zk);
        zk *= z;
        t = frac(t + theta);
    }
    return {acc.sum, geom_poly_tail(0.5, r, K, 0), K};
}

HeckeGap hecke_rrl_check(double theta, cplx z, std::size_t K) {
    const double r = std::abs(z);
    if (!(r > 1.0))
        throw OutsideDomain("the continuation identity is checked in |z| > 1");
    HeckeGap out;
    KahanSum acc;
    const cplx zi = 1.0 / z;
    cplx zm = 1.0;
    double t = 0.0; // {n theta} for n = -m
    for (std::size_t m = 1; m <= K; ++m) {
        zm *= zi;
        t = frac(t - theta);
        acc.add((t - 0.5) * zm);
    }
    out.outer_value = -acc.sum;
    const SeriesValue inner = hecke_reference(theta, zi, K);
    out.inner_value = inner.value;
    out.gap = std::abs(out.outer_value - out.inner_value - 0.5);
    // Far from the circle the analytic tails shrink below the rounding of
    // the two compensated sums, so the certificate carries a summation
    // rounding allowance on top of the truncation bounds.
    const double rounding = 4.0 * std::numeric_limits<double>::epsilon() *
                            static_cast<double>(K + 1) *
                            std::max({1.0, std::abs(out.outer_value),
                                      std::abs(out.inner_value)});
    out.combined_tails = inner.tail + geom_poly_tail(0.5, 1.0 / r, K + 1, 0) +
                         rounding;
    return out;
}

TelescopingReport coboundary_telescoping_check(
    const PostcriticalOrbit& orbit, const std::function<double(double)>& psi,
    double omega, std::size_t K) {
    if (orbit.points.size() < K + 1) throw OrbitTooShort(orbit.points.size(), K + 1);
    TelescopingReport report;
    RotationStream rot(omega);
    const cplx u0 = rot.next() * psi(orbit.points[0]);
    cplx u_prev = u0;
    KahanSum acc;
    for (std::size_t k = 1; k <= K; ++k) {
        const cplx u = rot.next() * psi(orbit.points[k]);
        acc.add(u_prev - u);
        const double residual = std::abs(acc.sum - (u0 - u));
        if (residual > report.max_residual) {
            report.max_residual = residual;
            report.argmax_k = k;
        }
        u_prev = u;
    }
    return report;
}

} // namespace suscept
