// Microbenchmarks for the hot paths: operator assembly, density solves,
// series summation, and the assembled evaluation. Run the binary directly,
// or pass --benchmark_filter to pick a group.

#include <benchmark/benchmark.h>

#include "suscept/acim.hpp"
#include "suscept/expr.hpp"
#include "suscept/map.hpp"
#include "suscept/observable.hpp"
#include "suscept/series.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace {

using namespace suscept;

UnimodalMap tent(double slope) {
    MapSpec spec;
    spec.family = TentParams{slope};
    return build_map(spec);
}

UnimodalMap curved() {
    MapSpec spec;
    PolyParams p;
    p.left = {0.0, 1.5, 1.0};
    p.right = {2.0, -2.0};
    spec.family = p;
    return build_map(spec);
}

Observable obs_x(const UnimodalMap& m) {
    return make_observable(Expr::parse("x"), m.a, m.b, "x");
}

void BM_BuildUlamAffine(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const std::size_t cells = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_ulam(m, cells));
}
BENCHMARK(BM_BuildUlamAffine)->Arg(1024)->Arg(4096)->Arg(16384);

// curved branches pay for bracketed inversion in every cell
void BM_BuildUlamCurved(benchmark::State& state) {
    const UnimodalMap m = curved();
    const std::size_t cells = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_ulam(m, cells));
}
BENCHMARK(BM_BuildUlamCurved)->Arg(1024)->Arg(4096);

void BM_StationaryDensity(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const UlamOperator op =
        build_ulam(m, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stationary_density(op));
}
BENCHMARK(BM_StationaryDensity)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_ResolventSolve(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const UlamOperator op =
        build_ulam(m, static_cast<std::size_t>(state.range(0)));
    std::vector<cplx> g(op.n_cells);
    for (std::size_t i = 0; i < op.n_cells; ++i)
        g[i] = cplx(op.center(i) - 0.5, 0.0);
    const cplx z(0.5, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(resolvent_solve(op, z, g));
}
BENCHMARK(BM_ResolventSolve)->Arg(1024)->Arg(4096);

// radius 1 - 2^-j: the certified truncation grows like 2^j ln(1/tol)
void BM_SigmaDirect(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 300000);
    const Observable phi = obs_x(m);
    const double r = 1.0 - std::pow(2.0, -static_cast<double>(state.range(0)));
    const cplx z = std::polar(r, 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(sigma_eval(orbit, phi, z, SigmaMode::Direct));
}
BENCHMARK(BM_SigmaDirect)->Arg(4)->Arg(8)->Arg(12);

void BM_SigmaStreamed(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const Observable phi = obs_x(m);
    const double r = 1.0 - std::pow(2.0, -static_cast<double>(state.range(0)));
    const cplx z = std::polar(r, 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(sigma_eval_streamed(m, phi, z, 1e-10, 1000000));
}
BENCHMARK(BM_SigmaStreamed)->Arg(4)->Arg(8)->Arg(12);

void BM_RotatedSums(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const std::size_t msum = static_cast<std::size_t>(state.range(0));
    const PostcriticalOrbit orbit = postcritical_orbit(m, msum + 1);
    const Observable phi = obs_x(m);
    for (auto _ : state)
        benchmark::DoNotOptimize(rotated_sums(orbit, phi, 0.7, msum));
}
BENCHMARK(BM_RotatedSums)->Arg(10000)->Arg(100000);

void BM_AlphaEval(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 4096);
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const cplx z(0.9, 0.2);
    for (auto _ : state)
        benchmark::DoNotOptimize(alpha_eval(m, orbit, X, 1, z));
}
BENCHMARK(BM_AlphaEval);

void BM_SusceptFactorized(benchmark::State& state) {
    const UnimodalMap m = tent(1.9);
    const UlamOperator op = build_ulam(m, 2048);
    const AcimDensity dens = stationary_density(op);
    const PostcriticalOrbit orbit = postcritical_orbit(m, 8192);
    const SaltusDecomposition sal = saltus_decomposition(op, dens, m, orbit);
    const SusceptibilityContext ctx{m, orbit, op, sal};
    const Perturbation X = make_perturbation(Expr::parse("x - x^2"), m);
    const Observable phi = mean_normalize(obs_x(m), op, dens);
    const cplx z(0.6, 0.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(susceptibility_eval(ctx, X, phi, z));
}
BENCHMARK(BM_SusceptFactorized);

} // namespace

BENCHMARK_MAIN();
