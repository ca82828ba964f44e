#include <benchmark/benchmark.h>

#include <vector>

#include "cphbl/control.hpp"
#include "cphbl/harness.hpp"
#include "cphbl/rng.hpp"

namespace {

void BM_PlacementKnapsack(benchmark::State& state) {
  const auto files = static_cast<std::size_t>(state.range(0));
  const auto capacity = static_cast<std::int64_t>(state.range(1));
  cphbl::RngStream rng(11);
  std::vector<std::int64_t> sizes(files);
  std::vector<double> values(files);
  for (std::size_t f = 0; f < files; ++f) {
    sizes[f] = 1 + static_cast<std::int64_t>(rng.uniform_index(8));
    values[f] = 10.0 * rng.uniform01();
  }
  cphbl::PlacementSolver solver;
  std::vector<std::uint8_t> row(files);
  for (auto _ : state) {
    solver.solve_values(values, sizes, capacity, row);
    benchmark::DoNotOptimize(row.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(files) * capacity);
}
BENCHMARK(BM_PlacementKnapsack)->Args({20, 16})->Args({100, 64})->Args({500, 256});

// Per-slot cost of a full simulation on the reference configuration.
void BM_SimulationSlots(benchmark::State& state) {
  auto cfg = cphbl::reference_config();
  cfg.horizon = static_cast<std::uint64_t>(state.range(0));
  cfg.policy = cphbl::parse_policy_label(state.range(1) == 0 ? "cphbl" : "lru");
  const auto model = cphbl::PopularityModel::from_config(cfg);
  const auto r_star = cphbl::r_star(cfg, model);
  cphbl::RunOptions opts;
  opts.r_star = &r_star;
  for (auto _ : state) {
    auto rec = cphbl::run_simulation(cfg, opts);
    benchmark::DoNotOptimize(rec.checkpoints.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulationSlots)->Args({20000, 0})->Args({20000, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
