// Serial reference path against the OpenMP path for the three parallel
// kernels. The second argument of every benchmark selects the path.
#include <benchmark/benchmark.h>

#include "ehsc/config.hpp"
#include "ehsc/feasibility.hpp"
#include "ehsc/mdp.hpp"
#include "ehsc/region.hpp"
#include "ehsc/simulator.hpp"

namespace {

using namespace ehsc;

void BM_RegionSweep(benchmark::State& state) {
    RegionSetup setup = region_setup(*load_preset("fig2b").region);
    setup.axis1 = log_grid(0.1, 1e4, static_cast<std::size_t>(state.range(0)));
    setup.axis2 = setup.axis1;
    const bool parallel = state.range(1) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(region_sweep(setup, PolicyClass::Do, {}, parallel).feasible_count());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_RegionSweep)->ArgsProduct({{16}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_RunBatch(benchmark::State& state) {
    const SensorSpec spec{GaussianIidSourceModel{}, SlotGeometry(100, 100),
                          Environment{{1.0, 10.0}, {0.5, 0.5}, {1.0, 10.0}, {0.5, 0.5}, UniformEnergy{0.0, 2.0}}};
    const FeasibilityReport rep = synthesize_do(spec, 0.8);
    std::vector<RunJob> jobs;
    for (std::uint64_t s = 0; s < 8; ++s) jobs.push_back({spec, *rep.witness, 50'000, s});
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(jobs, parallel).size());
    state.SetItemsProcessed(state.iterations() * 8 * 50'000);
}
BENCHMARK(BM_RunBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BellmanBackup(benchmark::State& state) {
    const DelayDistortionMdp m = build_mdp(load_preset("fig4").tradeoff->spec);
    std::vector<double> v(m.mdp.size(), 0.0), out;
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bellman_backup(m.mdp, 0.5, v, out, parallel));
        v.swap(out);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.mdp.size()));
}
BENCHMARK(BM_BellmanBackup)->Arg(0)->Arg(1);

} // namespace

BENCHMARK_MAIN();
