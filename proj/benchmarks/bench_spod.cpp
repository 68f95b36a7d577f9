#include "spod/greedy.hpp"
#include "spod/objective.hpp"
#include "spod/shift.hpp"
#include "spod/synthgen.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace spod;

namespace {

void BM_ApplyShift(benchmark::State& state) {
  const Index m = state.range(0);
  const auto grid = Grid1D::periodic(m, 1.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(m);
  for (Index i = 0; i < m; ++i) v(i) = n01(rng);
  const ShiftSpec spec{ShiftBoundary::periodic, static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(apply_shift(v, 0.123, grid, spec));
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_ApplyShift)->Args({1024, 1})->Args({1024, 3})->Args({8192, 3});

void BM_ObjectiveEvaluate(benchmark::State& state) {
  synth::WaveParams p;
  p.m = state.range(0);
  p.n = 129;
  const auto X = synth::wave_snapshots(p);
  const auto shifts = synth::wave_frame_shifts(p, X.time);
  const auto frames = initialize_frames(X.X, shifts, X.grid, {2, 2});
  ObjectiveOptions opts;
  opts.threads = static_cast<int>(state.range(1));
  const ReducedObjective objective(X.X, shifts, X.grid, opts);
  for (auto _ : state) benchmark::DoNotOptimize(objective.evaluate(frames).value);
}
BENCHMARK(BM_ObjectiveEvaluate)->Args({512, 1})->Args({1024, 1})->Args({1024, 4})->Unit(benchmark::kMillisecond);

void BM_GreedyThreeSignal(benchmark::State& state) {
  const auto c = synth::three_signal_default(128, 65);
  GreedyConfig cfg;
  cfg.r0 = {1, 1, 0};
  cfg.tol = 1e-6;
  cfg.p_max = 2;
  cfg.optimizer.max_iters = 100;
  for (auto _ : state) benchmark::DoNotOptimize(spod_decompose(c.snapshots, c.shifts, cfg).report.final_error);
}
BENCHMARK(BM_GreedyThreeSignal)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
