// Serial reference vs OpenMP kernels.
//   ./build/bench/ecofence_bench --benchmark_filter=Fleet
#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "ecofence/kernels.hpp"
#include "ecofence/reporting.hpp"
#include "ecofence/rng.hpp"
#include "ecofence/scenario_io.hpp"

namespace {

using namespace ecofence;

std::vector<FleetSample> make_fleet(std::size_t n) {
  UniformStream rng(7, StreamPurpose::Workload);
  std::vector<FleetSample> fleet;
  fleet.reserve(n);
  for (std::size_t i = 0; i < n; ++i) fleet.push_back({VehicleClass(rng.next_int(1, 4)), 5.0 + 120.0 * rng.next()});
  return fleet;
}

std::vector<GeofenceProblem> make_problems(std::size_t n) {
  UniformStream rng(11, StreamPurpose::Workload);
  std::vector<GeofenceProblem> problems(n);
  for (auto& p : problems) {
    const int size = rng.next_int(10, 60);
    double demand = 0.0;
    for (int i = 0; i < size; ++i) {
      p.entries.push_back({"v" + std::to_string(i), 1.0 + 9.0 * rng.next(), 2.0 * rng.next()});
      demand += p.entries.back().emission_rate;
    }
    p.limit = demand * rng.next();
  }
  return problems;
}

void BM_FleetRatesSerial(benchmark::State& state) {
  const auto fleet = make_fleet(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(fleet.size());
  for (auto _ : state) {
    serial::fleet_emission_rates(fleet, default_coefficient_table(), PollutantKind::CO, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FleetRatesParallel(benchmark::State& state) {
  const auto fleet = make_fleet(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(fleet.size());
  for (auto _ : state) {
    parallel::fleet_emission_rates(fleet, default_coefficient_table(), PollutantKind::CO, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SolveBatchSerial(benchmark::State& state) {
  const auto problems = make_problems(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::solve_batch(problems));
}

void BM_SolveBatchParallel(benchmark::State& state) {
  const auto problems = make_problems(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parallel::solve_batch(problems));
}

void BM_SweepSerial(benchmark::State& state) {
  const Scenario scenario = load_scenario(ECOFENCE_SOURCE_DIR "/scenarios/demo_corridor.json");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(state.range(0)));
  std::iota(seeds.begin(), seeds.end(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(serial::sweep(scenario, seeds));
}

void BM_SweepParallel(benchmark::State& state) {
  const Scenario scenario = load_scenario(ECOFENCE_SOURCE_DIR "/scenarios/demo_corridor.json");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(state.range(0)));
  std::iota(seeds.begin(), seeds.end(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(parallel::sweep(scenario, seeds));
}

}  // namespace

BENCHMARK(BM_FleetRatesSerial)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_FleetRatesParallel)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_SolveBatchSerial)->Arg(256)->Arg(4096);
BENCHMARK(BM_SolveBatchParallel)->Arg(256)->Arg(4096);
BENCHMARK(BM_SweepSerial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
