#include "criteria.hpp"

#include "suscept/acim.hpp"
#include "suscept/diagnostics.hpp"
#include "suscept/errors.hpp"
#include "suscept/map.hpp"
#include "suscept/observable.hpp"
#include "suscept/report.hpp"
#include "suscept/response.hpp"
#include "suscept/right_limits.hpp"
#include "suscept/scenario.hpp"
#include "suscept/series.hpp"
#include "suscept/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace suscept;

constexpr double pi = std::numbers::pi;

struct Run {
    std::optional<Scenario> sc;
    std::string out = "out";
    unsigned workers = 1;
    std::uint64_t seed = 1;
};

std::uint64_t run_hash(const Run& run) { return run.sc ? run.sc->hash : 0; }

double param(const Run& run, const std::string& key, double fallback) {
    return run.sc ? scenario_num(*run.sc, key, fallback) : fallback;
}

std::size_t param_size(const Run& run, const std::string& key,
                       std::size_t fallback) {
    const double v = param(run, key, static_cast<double>(fallback));
    if (!(v >= 0.0)) throw ConfigError("config key '" + key + "' is negative");
    return static_cast<std::size_t>(v);
}

std::vector<double> param_list(const Run& run, const std::string& key,
                               std::vector<double> fallback) {
    return run.sc ? scenario_nums(*run.sc, key, std::move(fallback))
                  : std::move(fallback);
}

UnimodalMap map_of(const Run& run) {
    if (!run.sc) throw ConfigError("this command needs --config");
    return build_map(run.sc->map);
}

Observable observable_of(const Run& run, const UnimodalMap& map) {
    if (!run.sc || run.sc->observable.empty())
        throw ConfigError("this command needs an 'observable' expression");
    return make_observable(Expr::parse(run.sc->observable), map.a, map.b,
                           run.sc->observable);
}

Perturbation perturbation_of(const Run& run, const UnimodalMap& map) {
    if (!run.sc || run.sc->perturbation.empty())
        throw ConfigError("this command needs a 'perturbation' expression");
    return make_perturbation(Expr::parse(run.sc->perturbation), map,
                             run.sc->perturbation);
}

std::string cnum(double v) { return format_num(v); }

// 53-bit uniform in [0, 1), independent of distribution internals
double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> checkpoints(std::size_t m_max) {
    std::vector<std::size_t> ms;
    for (std::size_t base = 10; base <= m_max; base *= 10)
        for (std::size_t mult : {std::size_t{1}, std::size_t{2}, std::size_t{5}}) {
            const std::size_t m = base * mult;
            if (m <= m_max) ms.push_back(m);
        }
    if (ms.empty() || ms.back() != m_max) ms.push_back(m_max);
    return ms;
}

std::vector<double> dyadic_radii(int j_lo, int j_hi) {
    std::vector<double> radii;
    for (int j = j_lo; j <= j_hi; ++j)
        radii.push_back(1.0 - std::pow(2.0, -j));
    return radii;
}

template <class F>
void parallel_for(unsigned workers, std::size_t n, F&& body) {
    const std::size_t k = std::min<std::size_t>(workers ? workers : 1, n);
    if (k <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < k; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// ---- commands --------------------------------------------------------------

void cmd_acim(const Run& run) {
    const UnimodalMap map = map_of(run);
    const std::size_t cells = param_size(run, "params.cells", 4096);
    const double tol = param(run, "params.tol", 1e-10);
    const double eps_s = param(run, "params.eps_s", 1e-10);
    const std::size_t orbit_len = param_size(run, "params.orbit_len", 1024);

    const UlamOperator op = build_ulam(map, cells);
    const AcimDensity den = stationary_density(op, tol);
    const PostcriticalOrbit orbit = postcritical_orbit(map, orbit_len);
    const SaltusDecomposition sal =
        saltus_decomposition(op, den, map, orbit, eps_s);

    ArtifactHeader h{"acim", run_hash(run), {}};
    h.set("cells", static_cast<double>(cells));
    h.set("tol", tol);
    h.set("eps_s", eps_s);
    h.set("orbit_len", static_cast<double>(orbit_len));
    h.set("residual", den.residual);
    h.set("s1", sal.s1);
    h.set("saltus_tail_bound", sal.tail_bound);

    CsvWriter density(run.out + "/density.csv", h,
                      {"x", "rho", "rho_sal", "rho_reg"});
    for (std::size_t i = 0; i < cells; ++i)
        density.row({cnum(op.center(i)), cnum(den.rho[i]), cnum(sal.rho_sal[i]),
                     cnum(sal.rho_reg[i])});

    CsvWriter saltus(run.out + "/saltus.csv", h, {"n", "location", "jump"});
    for (std::size_t n = 0; n < sal.jumps.size(); ++n)
        saltus.row({std::to_string(n + 1), cnum(sal.locations[n]),
                    cnum(sal.jumps[n])});
}

void cmd_orbit(const Run& run) {
    const UnimodalMap map = map_of(run);
    const std::size_t orbit_len = param_size(run, "params.orbit_len", 10000);
    const PostcriticalOrbit orbit = postcritical_orbit(map, orbit_len);

    ArtifactHeader h{"orbit", run_hash(run), {}};
    h.set("orbit_len", static_cast<double>(orbit_len));
    if (orbit.preperiod) {
        h.set("preperiod", static_cast<double>(orbit.preperiod->preperiod));
        h.set("period", static_cast<double>(orbit.preperiod->period));
        h.set("preperiodicity",
              orbit.preperiod->proven ? std::string("proven")
                                      : std::string("detected"));
    } else {
        h.set("preperiodicity", std::string("none"));
    }

    // D_{k-1} instead of D_k so every row is defined (D_0 = 1)
    CsvWriter csv(run.out + "/orbit.csv", h, {"k", "c_k", "df_at_c_k", "D_km1"});
    for (std::size_t k = 1; k <= orbit.size(); ++k)
        csv.row({std::to_string(k), cnum(orbit.c(k)), cnum(orbit.slope(k)),
                 cnum(orbit.D(k - 1))});
}

void cmd_suscept(const Run& run) {
    const UnimodalMap map = map_of(run);
    const std::size_t cells = param_size(run, "params.cells", 4096);
    const std::size_t orbit_len = param_size(run, "params.orbit_len", 4096);
    const double tol = param(run, "params.tol", 1e-8);
    const bool normalize = param(run, "params.normalize", 1) != 0;
    const std::vector<double> radii =
        param_list(run, "params.radii", {0.25, 0.5, 0.75, 0.9});
    const std::vector<double> angles =
        param_list(run, "params.angles", {0.0, pi / 2, pi});
    const std::size_t backward_depth =
        param_size(run, "params.backward_depth", 200000);

    const UlamOperator op = build_ulam(map, cells);
    const AcimDensity den = stationary_density(op, 1e-10);
    const PostcriticalOrbit orbit = postcritical_orbit(map, orbit_len);
    const SaltusDecomposition sal = saltus_decomposition(op, den, map, orbit);
    const SusceptibilityContext ctx{map, orbit, op, sal};
    const Perturbation X = perturbation_of(run, map);
    Observable phi = observable_of(run, map);
    if (normalize) phi = mean_normalize(phi, op, den);

    bool any_outer = false;
    for (double r : radii) any_outer = any_outer || r > 1.0;
    std::optional<PrecriticalOrbit> pre;
    if (any_outer)
        pre = sample_precritical(map, op, den, backward_depth, run.seed);

    struct Point {
        double r, w;
        SusceptibilityValue v;
    };
    std::vector<Point> grid;
    for (double r : radii)
        for (double w : angles) grid.push_back({r, w, {}});
    parallel_for(run.workers, grid.size(), [&](std::size_t i) {
        const cplx z = std::polar(grid[i].r, grid[i].w);
        grid[i].v = susceptibility_eval(ctx, X, phi, z, tol,
                                        pre ? &*pre : nullptr);
    });

    ArtifactHeader h{"suscept", run_hash(run), {}};
    h.set("cells", static_cast<double>(cells));
    h.set("orbit_len", static_cast<double>(orbit_len));
    h.set("tol", tol);
    h.set("normalize", normalize ? 1.0 : 0.0);
    h.set("backward_depth", static_cast<double>(backward_depth));
    h.set("seed", static_cast<double>(run.seed));

    CsvWriter csv(run.out + "/suscept.csv", h,
                  {"r", "omega", "total_re", "total_im", "tail", "route",
                   "prefactor_re", "prefactor_im", "sigma_re", "sigma_im",
                   "remainder_re", "remainder_im", "hol_re", "hol_im"});
    for (const Point& p : grid) {
        const SusceptibilityValue& v = p.v;
        csv.row({cnum(p.r), cnum(p.w), cnum(v.total.value.real()),
                 cnum(v.total.value.imag()), cnum(v.total.tail),
                 v.route == AssemblyRoute::Coefficient ? "coefficient"
                                                       : "factorized",
                 cnum(v.prefactor.real()), cnum(v.prefactor.imag()),
                 cnum(v.sigma.real()), cnum(v.sigma.imag()),
                 cnum(v.remainder.real()), cnum(v.remainder.imag()),
                 cnum(v.hol_part.real()), cnum(v.hol_part.imag())});
    }
}

void cmd_boundary_scan(const Run& run) {
    const UnimodalMap map = map_of(run);
    const std::size_t orbit_len = param_size(run, "params.orbit_len", 100000);
    const double tol = param(run, "params.tol", 1e-6);
    const double omega_lo = param(run, "params.omega_lo", -0.3);
    const double omega_hi = param(run, "params.omega_hi", 0.3);
    const int j_lo = static_cast<int>(param(run, "params.j_lo", 2));
    const int j_hi = static_cast<int>(param(run, "params.j_hi", 9));
    const std::size_t panels = param_size(run, "params.initial_panels", 1024);
    const bool normalize = param(run, "params.normalize", 0) != 0;

    const PostcriticalOrbit orbit = postcritical_orbit(map, orbit_len);
    Observable phi = observable_of(run, map);
    if (normalize) {
        const UlamOperator op = build_ulam(map, 4096);
        const AcimDensity den = stationary_density(op, 1e-10);
        phi = mean_normalize(phi, op, den);
    }
    const Evaluator ev = [&](cplx z) {
        return sigma_eval(orbit, phi, z, SigmaMode::Direct, tol);
    };
    const ScanReport rep =
        radial_scan(ev, omega_lo, omega_hi, dyadic_radii(j_lo, j_hi), panels);

    ArtifactHeader h{"boundary-scan", run_hash(run), {}};
    h.set("orbit_len", static_cast<double>(orbit_len));
    h.set("tol", tol);
    h.set("omega_lo", omega_lo);
    h.set("omega_hi", omega_hi);
    h.set("j_lo", static_cast<double>(j_lo));
    h.set("j_hi", static_cast<double>(j_hi));
    h.set("initial_panels", static_cast<double>(panels));
    h.set("normalize", normalize ? 1.0 : 0.0);
    h.set("slope", rep.slope);
    h.set("verdict", rep.verdict);

    CsvWriter csv(run.out + "/boundary_scan.csv", h,
                  {"r", "arc_integral", "max_tail"});
    for (const ScanSample& s : rep.samples)
        csv.row({cnum(s.x), cnum(s.value.real()), cnum(s.aux)});
}

void cmd_nt_limit(const Run& run) {
    const UnimodalMap map = map_of(run);
    const double omega = param(run, "params.omega", 0.0);
    const int j_lo = static_cast<int>(param(run, "params.j_lo", 4));
    const int j_hi = static_cast<int>(param(run, "params.j_hi", 15));
    const int deriv = static_cast<int>(param(run, "params.deriv", 0));
    const bool outer = param(run, "params.outer", 0) != 0;
    const std::string weight =
        run.sc ? scenario_str(*run.sc, "params.weight", "none") : "none";
    const double tol = param(run, "params.tol", 1e-8);
    const std::size_t orbit_len = param_size(run, "params.orbit_len", 1200000);
    const std::size_t backward_depth =
        param_size(run, "params.backward_depth", 1200000);
    const bool normalize = param(run, "params.normalize", 0) != 0;
    if (outer && deriv != 0)
        throw ConfigError("derivative orders apply to the inner series only");
    if (weight != "none" && weight != "pole")
        throw ConfigError("params.weight must be 'none' or 'pole'");

    Observable phi;
    std::optional<PostcriticalOrbit> orbit;
    std::optional<PrecriticalOrbit> pre;
    std::optional<UlamOperator> op;
    std::optional<AcimDensity> den;
    if (outer || normalize) {
        op.emplace(build_ulam(map, 4096));
        den.emplace(stationary_density(*op, 1e-10));
    }
    {
        Observable raw = observable_of(run, map);
        phi = normalize ? mean_normalize(raw, *op, *den) : raw;
    }
    Evaluator ev;
    if (outer) {
        pre.emplace(sample_precritical(map, *op, *den, backward_depth, run.seed));
        ev = [&](cplx z) { return sigma_outer_eval(*pre, phi, z, tol); };
    } else {
        orbit.emplace(postcritical_orbit(map, orbit_len));
        ev = [&, deriv](cplx z) {
            return deriv == 0
                       ? sigma_eval(*orbit, phi, z, SigmaMode::Direct, tol)
                       : sigma_deriv_eval(*orbit, phi, z, deriv, tol);
        };
    }
    SectorSpec sector;
    sector.omega = omega;
    sector.half_aperture = param(run, "params.half_aperture", 0.0);
    sector.j_lo = j_lo;
    sector.j_hi = j_hi;
    sector.outer = outer;
    const ScanReport rep = nontangential_limit(
        ev, sector, weight == "pole" ? NtWeight::PoleFactor : NtWeight::None);

    ArtifactHeader h{"nt-limit", run_hash(run), {}};
    h.set("omega", omega);
    h.set("half_aperture", sector.half_aperture);
    h.set("j_lo", static_cast<double>(j_lo));
    h.set("j_hi", static_cast<double>(j_hi));
    h.set("deriv", static_cast<double>(deriv));
    h.set("outer", outer ? 1.0 : 0.0);
    h.set("weight", weight);
    h.set("tol", tol);
    h.set(outer ? "backward_depth" : "orbit_len",
          static_cast<double>(outer ? backward_depth : orbit_len));
    h.set("normalize", normalize ? 1.0 : 0.0);
    if (outer) h.set("seed", static_cast<double>(run.seed));
    h.set("limit_re", rep.limit.real());
    h.set("limit_im", rep.limit.imag());
    h.set("err", rep.err);
    h.set("verdict", rep.verdict);

    CsvWriter csv(run.out + "/nt_limit.csv", h,
                  {"r", "value_re", "value_im", "tail"});
    for (const ScanSample& s : rep.samples)
        csv.row({cnum(s.x), cnum(s.value.real()), cnum(s.value.imag()),
                 cnum(s.aux)});
}

void cmd_ww(const Run& run) {
    const UnimodalMap map = map_of(run);
    const std::size_t m_max = param_size(run, "params.m_max", 100000);
    const bool normalize = param(run, "params.normalize", 1) != 0;
    const std::vector<double> omegas =
        param_list(run, "params.omegas", {0.0, 1.0, 2.0});

    const PostcriticalOrbit orbit = postcritical_orbit(map, m_max);
    Observable phi = observable_of(run, map);
    if (normalize) {
        const UlamOperator op = build_ulam(map, 4096);
        const AcimDensity den = stationary_density(op, 1e-10);
        phi = mean_normalize(phi, op, den);
    }
    const std::vector<std::size_t> ms = checkpoints(m_max);
    const WwReport rep = wiener_wintner_check(orbit, phi, omegas, ms);

    ArtifactHeader h{"ww", run_hash(run), {}};
    h.set("m_max", static_cast<double>(m_max));
    h.set("normalize", normalize ? 1.0 : 0.0);
    for (std::size_t i = 0; i < omegas.size(); ++i)
        h.set("verdict[omega=" + cnum(omegas[i]) + "]",
              rep.per_omega_verdicts[i]);
    h.set("all_decaying", rep.all_decaying ? 1.0 : 0.0);

    CsvWriter csv(run.out + "/ww.csv", h, {"omega", "m", "modulus"});
    for (const WwSample& s : rep.samples)
        csv.row({cnum(s.omega), std::to_string(s.m), cnum(s.modulus)});
}

void cmd_lil(const Run& run) {
    const UnimodalMap map = map_of(run);
    const double omega = param(run, "params.omega", 1.0);
    const std::size_t m_max = param_size(run, "params.m_max", 100000);
    const bool normalize = param(run, "params.normalize", 1) != 0;
    std::vector<double> exponents;
    for (double e = 2.0; e <= 6.0 + 1e-9; e += 0.25) exponents.push_back(e);
    exponents = param_list(run, "params.exponents", exponents);

    const PostcriticalOrbit orbit = postcritical_orbit(map, m_max);
    Observable phi = observable_of(run, map);
    if (normalize) {
        const UlamOperator op = build_ulam(map, 4096);
        const AcimDensity den = stationary_density(op, 1e-10);
        phi = mean_normalize(phi, op, den);
    }
    const ScanReport ratio = lil_ratio(orbit, phi, omega, checkpoints(m_max));

    ArtifactHeader h{"lil", run_hash(run), {}};
    h.set("omega", omega);
    h.set("m_max", static_cast<double>(m_max));
    h.set("normalize", normalize ? 1.0 : 0.0);
    h.set("ratio_verdict", ratio.verdict);
    CsvWriter rcsv(run.out + "/lil_ratio.csv", h,
                   {"m", "ratio", "running_sup"});
    for (const ScanSample& s : ratio.samples)
        rcsv.row({cnum(s.x), cnum(s.value.real()), cnum(s.aux)});

    std::vector<double> radii;
    for (double e : exponents) radii.push_back(1.0 - std::pow(10.0, -e));
    const ScanReport env = lil_envelope_check(radii);
    ArtifactHeader he{"lil", run_hash(run), {}};
    he.set("exponent_lo", exponents.front());
    he.set("exponent_hi", exponents.back());
    he.set("n_radii", static_cast<double>(radii.size()));
    he.set("slope", env.slope);
    he.set("envelope_verdict", env.verdict);
    CsvWriter ecsv(run.out + "/lil_envelope.csv", he,
                   {"r", "L", "ratio_to_envelope"});
    for (const ScanSample& s : env.samples)
        ecsv.row({cnum(s.x), cnum(s.value.real()), cnum(s.aux)});
}

void cmd_witness(const Run& run) {
    const UnimodalMap map = map_of(run);
    const double delta = param(run, "params.delta", 0.3);
    const std::size_t orbit_len = param_size(run, "params.orbit_len", 1000000);
    const std::size_t max_level = param_size(run, "params.max_level", 8);

    const PostcriticalOrbit orbit = postcritical_orbit(map, orbit_len);
    const Observable phi = observable_of(run, map);
    const WitnessResult wr =
        breuer_simon_witness(map, orbit, phi, delta, max_level);

    ArtifactHeader h{"witness", run_hash(run), {}};
    h.set("delta", delta);
    h.set("orbit_len", static_cast<double>(orbit_len));
    h.set("max_level", static_cast<double>(max_level));
    h.set("found", wr.pair ? 1.0 : 0.0);
    if (!wr.note.empty()) h.set("note", wr.note);
    if (wr.pair) {
        h.set("x", wr.pair->x);
        h.set("x_tilde", wr.pair->x_tilde);
        h.set("ell", static_cast<double>(wr.pair->ell));
        h.set("phi_gap", wr.pair->phi_gap);
    }

    CsvWriter csv(run.out + "/witness.csv", h,
                  {"n", "b", "gap_b", "b_tilde", "gap_b_tilde"});
    if (wr.pair) {
        const RightLimitWindow& w = wr.pair->window;
        const RightLimitWindow& wt = wr.pair->window_tilde;
        for (long n = -w.half_width; n <= w.half_width; ++n)
            csv.row({std::to_string(n), cnum(w.b(n)), cnum(w.gap(n)),
                     cnum(wt.b(n)), cnum(wt.gap(n))});
    }
}

nlohmann::json value_err_json(const ValueWithError& v) {
    return {{"value", {v.value.real(), v.value.imag()}}, {"err", v.err}};
}

void cmd_response(const Run& run) {
    const UnimodalMap map = map_of(run);
    ResponseConfig cfg;
    cfg.t0 = param(run, "params.t0", cfg.t0);
    cfg.n_cells = param_size(run, "params.cells", cfg.n_cells);
    cfg.orbit_len = param_size(run, "params.orbit_len", cfg.orbit_len);
    cfg.precritical_depth =
        param_size(run, "params.backward_depth", cfg.precritical_depth);
    cfg.birkhoff_m = param_size(run, "params.birkhoff_m", cfg.birkhoff_m);
    cfg.birkhoff_tol = param(run, "params.birkhoff_tol", cfg.birkhoff_tol);
    cfg.j_lo = static_cast<int>(param(run, "params.j_lo", cfg.j_lo));
    cfg.j_hi = static_cast<int>(param(run, "params.j_hi", cfg.j_hi));
    cfg.tol = param(run, "params.tol", cfg.tol);
    cfg.seed = run.seed;

    const Perturbation X = perturbation_of(run, map);
    const Observable phi = observable_of(run, map);
    const ResponseReport rep = response_report(map, X, phi, cfg);

    nlohmann::json j;
    j["command"] = "response";
    j["scenario"] = hash_hex(run_hash(run));
    j["version"] = kVersion;
    j["settings"] = {{"t0", cfg.t0},
                     {"cells", cfg.n_cells},
                     {"orbit_len", cfg.orbit_len},
                     {"backward_depth", cfg.precritical_depth},
                     {"birkhoff_m", cfg.birkhoff_m},
                     {"birkhoff_tol", cfg.birkhoff_tol},
                     {"j_lo", cfg.j_lo},
                     {"j_hi", cfg.j_hi},
                     {"tol", cfg.tol},
                     {"seed", cfg.seed}};
    j["fd"] = value_err_json(rep.fd);
    if (rep.formula_available)
        j["formula"] = value_err_json(rep.formula);
    else
        j["formula"] = nullptr;
    j["nt_inner"] = value_err_json(rep.nt_inner);
    j["nt_outer"] = value_err_json(rep.nt_outer);
    j["horizontality"] = {{"order", rep.horizontality.order},
                          {"residuals", rep.horizontality.residuals}};
    j["u_at_one"] = rep.u_at_one;
    j["birkhoff"] = {{"deviation", rep.birkhoff.deviation},
                     {"m", rep.birkhoff.m},
                     {"pass", rep.birkhoff.pass},
                     {"seed", rep.birkhoff_seed}};
    j["spread"] = rep.spread;
    j["consistent"] = rep.consistent;

    std::ofstream out(run.out + "/response.json");
    if (!out)
        throw ConfigError("cannot open output file '" + run.out +
                          "/response.json'");
    out << j.dump(2) << "\n";
}

void cmd_hecke(const Run& run) {
    const double theta =
        param(run, "params.theta", (std::sqrt(5.0) - 1.0) / 2.0);
    const std::size_t K = param_size(run, "params.terms", 200);
    const std::size_t count = param_size(run, "params.count", 20);
    const double r_lo = param(run, "params.r_lo", 1.1);
    const double r_hi = param(run, "params.r_hi", 3.0);

    std::mt19937_64 rng(run.seed);
    std::vector<cplx> zs;
    for (std::size_t i = 0; i < count; ++i)
        zs.push_back(
            std::polar(r_lo + (r_hi - r_lo) * unit(rng), 2.0 * pi * unit(rng)));

    ArtifactHeader h{"hecke", run_hash(run), {}};
    h.set("theta", theta);
    h.set("terms", static_cast<double>(K));
    h.set("count", static_cast<double>(count));
    h.set("r_lo", r_lo);
    h.set("r_hi", r_hi);
    h.set("seed", static_cast<double>(run.seed));

    CsvWriter csv(run.out + "/hecke.csv", h,
                  {"z_re", "z_im", "gap", "combined_tails", "outer_re",
                   "outer_im", "inner_re", "inner_im"});
    std::vector<HeckeGap> gaps(zs.size());
    parallel_for(run.workers, zs.size(),
                 [&](std::size_t i) { gaps[i] = hecke_rrl_check(theta, zs[i], K); });
    for (std::size_t i = 0; i < zs.size(); ++i)
        csv.row({cnum(zs[i].real()), cnum(zs[i].imag()), cnum(gaps[i].gap),
                 cnum(gaps[i].combined_tails), cnum(gaps[i].outer_value.real()),
                 cnum(gaps[i].outer_value.imag()),
                 cnum(gaps[i].inner_value.real()),
                 cnum(gaps[i].inner_value.imag())});
}

int cmd_verify(const std::string& tag, const Run& run, bool write_csv) {
    const std::vector<int> ids = criteria::criteria_for_tag(tag);
    std::optional<CsvWriter> csv;
    if (write_csv) {
        ArtifactHeader h{"verify", run_hash(run), {}};
        h.set("tag", tag);
        csv.emplace(run.out + "/verify.csv", h,
                    std::vector<std::string>{"id", "name", "pass", "seconds",
                                             "detail"});
    }
    int failed = 0;
    for (int id : ids) {
        const criteria::CriterionResult res = criteria::run_criterion(id);
        if (!res.pass) ++failed;
        std::printf("criterion %2d  %s  %s (%.1f s)\n    %s\n", res.id,
                    res.pass ? "PASS" : "FAIL", res.name.c_str(), res.seconds,
                    res.detail.c_str());
        std::fflush(stdout);
        if (csv) {
            std::string detail = res.detail;
            for (char& c : detail)
                if (c == ',') c = ';';
            csv->row({std::to_string(res.id), res.name,
                      res.pass ? "1" : "0", cnum(res.seconds), detail});
        }
    }
    std::printf("%zu/%zu criteria passed\n", ids.size() - failed, ids.size());
    return failed == 0 ? 0 : 1;
}

int numeric_failure(const Run& run, const std::string& cmd,
                    const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    try {
        nlohmann::json j;
        j["command"] = cmd;
        j["scenario"] = hash_hex(run_hash(run));
        j["version"] = kVersion;
        j["error"] = e.what();
        j["exit_code"] = 3;
        std::ofstream(run.out + "/failure.json") << j.dump(2) << "\n";
    } catch (...) {
        // the diagnosis on stderr is the fallback
    }
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for susceptibility series of piecewise "
                 "expanding unimodal maps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config, out = "out", overrides, tag = "all";
    unsigned workers = 1;
    std::uint64_t seed = 1;
    app.add_option("--config", config, "scenario config file (JSON)");
    app.add_option("--out", out, "output directory")->capture_default_str();
    app.add_option("--workers", workers,
                   "threads for independent samples (results are "
                   "order-deterministic)")
        ->capture_default_str();
    app.add_option("--seed", seed, "seed for sampled backward orbits and draws")
        ->capture_default_str();
    app.add_option("--tol-overrides", overrides,
                   "comma-separated dotted-path overrides, e.g. "
                   "params.tol=1e-9,params.cells=8192");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"acim", "invariant density and its jump decomposition"},
        {"orbit", "postcritical orbit and derivative products"},
        {"suscept", "assembled susceptibility over a z grid"},
        {"boundary-scan", "arc integrals of the coefficient series near |z|=1"},
        {"nt-limit", "nontangential limit along a radius (inner or outer)"},
        {"ww", "rotated ergodic averages along the postcritical orbit"},
        {"lil", "iterated-logarithm ratios and majorant envelope"},
        {"witness", "branching right-limit witness pair"},
        {"response", "four routes to the linear-response value"},
        {"hecke", "reference series with a known natural boundary"},
    };
    for (const auto& [name, desc] : commands)
        app.add_subcommand(name, desc)->fallthrough();
    CLI::App* verify = app.add_subcommand("verify", "run acceptance criteria");
    verify->fallthrough();
    verify->add_option("tag", tag, "exact | oracle | all")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    const std::string cmd = app.get_subcommands().at(0)->get_name();
    Run run;
    run.out = out;
    run.workers = workers;
    run.seed = seed;
    try {
        const bool needs_config = cmd != "hecke" && cmd != "verify";
        if (!config.empty()) {
            run.sc = load_scenario(config);
            if (!overrides.empty()) apply_overrides(*run.sc, overrides);
        } else if (needs_config) {
            throw ConfigError("command '" + cmd + "' needs --config");
        }

        if (cmd == "verify")
            return cmd_verify(tag, run, app.count("--out") > 0);

        std::filesystem::create_directories(run.out);
        try {
            if (cmd == "acim") cmd_acim(run);
            else if (cmd == "orbit") cmd_orbit(run);
            else if (cmd == "suscept") cmd_suscept(run);
            else if (cmd == "boundary-scan") cmd_boundary_scan(run);
            else if (cmd == "nt-limit") cmd_nt_limit(run);
            else if (cmd == "ww") cmd_ww(run);
            else if (cmd == "lil") cmd_lil(run);
            else if (cmd == "witness") cmd_witness(run);
            else if (cmd == "response") cmd_response(run);
            else if (cmd == "hecke") cmd_hecke(run);
        } catch (const TailUnreachable& e) {
            return numeric_failure(run, cmd, e);
        } catch (const NoConvergence& e) {
            return numeric_failure(run, cmd, e);
        } catch (const NearSingular& e) {
            return numeric_failure(run, cmd, e);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
