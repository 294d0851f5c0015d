#include "rslq/instances.hpp"
#include "rslq/sim.hpp"
#include "rslq/verify.hpp"

#include <benchmark/benchmark.h>

using namespace rslq;

static void BM_RiccatiDirect(benchmark::State& state)
{
    const auto spec = instances::standard_two_regime(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_riccati_direct(spec));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RiccatiDirect)->RangeMultiplier(4)->Range(100, 6400)->Complexity(benchmark::oN);

static void BM_RiccatiIterate(benchmark::State& state)
{
    const auto spec = instances::standard_two_regime(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(iterate_strongly_regular(spec));
}
BENCHMARK(BM_RiccatiIterate)->Arg(200)->Arg(1000);

static void BM_SolveEta(benchmark::State& state)
{
    const auto spec = instances::inhomogeneous_two_regime(static_cast<std::size_t>(state.range(0)));
    const auto ric = solve_riccati_direct(spec);
    for (auto _ : state) benchmark::DoNotOptimize(solve_eta(spec, ric));
}
BENCHMARK(BM_SolveEta)->Arg(200)->Arg(1000);

static void BM_McValue(benchmark::State& state)
{
    const auto spec = instances::inhomogeneous_two_regime(200);
    const auto ric = solve_riccati_direct(spec);
    const auto aff = solve_eta(spec, ric);
    SimOptions opts;
    opts.paths = static_cast<std::size_t>(state.range(0));
    opts.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(mc_value(spec, ric, aff, 0, Vec::Ones(2), opts));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}
BENCHMARK(BM_McValue)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_FeynmanKac(benchmark::State& state)
{
    const auto spec = instances::standard_two_regime(500);
    SimOptions opts;
    opts.paths = static_cast<std::size_t>(state.range(0));
    opts.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(feynman_kac_M0(spec, 0, opts));
}
BENCHMARK(BM_FeynmanKac)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Pinv(benchmark::State& state)
{
    const auto n = static_cast<Index>(state.range(0));
    const Mat m = Mat::Random(n, n);
    for (auto _ : state) benchmark::DoNotOptimize(pinv(m));
}
BENCHMARK(BM_Pinv)->Arg(2)->Arg(8)->Arg(32);
BENCHMARK_MAIN();
