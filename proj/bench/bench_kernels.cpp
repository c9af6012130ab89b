#include <benchmark/benchmark.h>

#include "pathtomo/batch.hpp"

using namespace pathtomo;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_OracleSweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(oracle_sweep(n, 1, 8, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void BM_MinTotalEigenvalue(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(min_total_eigenvalue(n, 1, 1.0, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void BM_MonteCarloFringe(benchmark::State& state) {
  MonteCarloSpec spec;
  spec.truth = {0.3, 1.2, 0.9};
  spec.t_h = 0.85;
  spec.t_v = 0.73;
  spec.trials = static_cast<std::size_t>(state.range(1));
  spec.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(spec, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void BM_MonteCarloMle(benchmark::State& state) {
  MonteCarloSpec spec;
  spec.truth = {0.3, 1.2, 0.9};
  spec.method = ReconstructionMethod::mle;
  spec.trials = static_cast<std::size_t>(state.range(1));
  spec.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(spec, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void BM_CalibrationMonteCarlo(benchmark::State& state) {
  const auto cfg = InterferometerConfig::balanced({0.5, 0.0, 1.0}, 0.85, 0.73);
  ScanPlan plan;
  plan.phases = uniform_phases(20);
  plan.counts_per_point = 10000;
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(calibration_monte_carlo(cfg, plan, n, 5, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void BM_HalfWaveSweep(benchmark::State& state) {
  SweepSpec spec;
  for (int a = 0; a <= 90; a += 5) spec.angles_deg.push_back(a);
  spec.noiseless = false;
  spec.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(spec, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(spec.angles_deg.size()));
  label(state);
}

}  // namespace

BENCHMARK(BM_OracleSweep)->ArgsProduct({{0, 1}, {1000}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MinTotalEigenvalue)->ArgsProduct({{0, 1}, {1000}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarloFringe)->ArgsProduct({{0, 1}, {500}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarloMle)->ArgsProduct({{0, 1}, {50}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CalibrationMonteCarlo)->ArgsProduct({{0, 1}, {500}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HalfWaveSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
