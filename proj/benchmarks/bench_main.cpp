#include <benchmark/benchmark.h>

#include <vector>

#include "parafrac/domains.hpp"
#include "parafrac/energy_probe.hpp"
#include "parafrac/parabolic_cover.hpp"
#include "parafrac/rng.hpp"
#include "parafrac/stable_sim.hpp"

namespace {

using namespace parafrac;

void BM_StableIncrement(benchmark::State& state) {
  const StableParams p{static_cast<double>(state.range(0)) / 10.0, 2, 1.0};
  Stream rng(7, 0);
  std::vector<double> out(2);
  for (auto _ : state) {
    sample_stable_increment(p, 1e-3, rng, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StableIncrement)->Arg(7)->Arg(15)->Arg(20);

void BM_SimulatePath(benchmark::State& state) {
  const auto grid = TimeGrid::uniform(static_cast<std::size_t>(1) << state.range(0), 1.0);
  for (auto _ : state) {
    auto path = simulate_path({1.5, 1, 1.0}, grid, 11);
    benchmark::DoNotOptimize(path.positions.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SimulatePath)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Occupancy(benchmark::State& state) {
  const auto grid = TimeGrid::uniform(static_cast<std::size_t>(1) << state.range(0), 1.0);
  const auto path = simulate_path({2.0, 1, 1.0}, grid, 3);
  const auto cloud = graph_cloud(path, DriftSpec::zero(1));
  std::vector<int> levels;
  for (int k = 2; k <= 12; ++k) levels.push_back(k);
  for (auto _ : state) {
    auto ledger = occupancy(cloud, 1.0, levels);
    benchmark::DoNotOptimize(ledger.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size() * levels.size()));
}
BENCHMARK(BM_Occupancy)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_KernelK(benchmark::State& state) {
  const KernelSampler sampler({1.5, 1, 1.0}, 100000, 5);
  const std::vector<double> delta{0.01};
  for (auto _ : state) {
    auto est = sampler.kernel_K(0.5, 1e-3, delta);
    benchmark::DoNotOptimize(est.value);
  }
}
BENCHMARK(BM_KernelK)->Unit(benchmark::kMillisecond);

void BM_EnergySweep(benchmark::State& state) {
  const auto ts = build_time_set(TimeSetKind::interval, static_cast<int>(state.range(0)));
  const auto mu = graph_measure(simulate_path({2.0, 1, 1.0}, ts.grid(), 9), DriftSpec::zero(1));
  const std::vector<double> betas{1.0, 1.25, 1.5, 1.75};
  for (auto _ : state) {
    auto reports = energy_sweep(mu, EnergyKernel::euclidean_beta, betas, {});
    benchmark::DoNotOptimize(reports.data());
  }
}
BENCHMARK(BM_EnergySweep)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
