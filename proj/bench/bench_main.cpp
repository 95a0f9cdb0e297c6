// Serial reference kernels vs their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "smd/engine.hpp"
#include "smd/ingestion.hpp"
#include "smd/maxflow.hpp"
#include "smd/oracle.hpp"

namespace {

using namespace smd;

MRFProblem grid_problem(int side, int labels, bool sizes = false) {
  SyntheticConfig cfg;
  cfg.grid_height = side;
  cfg.grid_width = side;
  cfg.label_count = labels;
  cfg.seed = 42;
  cfg.class_sizes = sizes;
  return generate_synthetic(cfg);
}

void BM_DualValue(benchmark::State& state) {
  const Exec exec = state.range(0) ? Exec::parallel : Exec::serial;
  const MRFProblem pb = grid_problem(static_cast<int>(state.range(1)), 5);
  const DualState dual = make_dual_state(pb);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_value(pb, dual, exec));
  }
}

void BM_MinMarginals(benchmark::State& state) {
  const Exec exec = state.range(0) ? Exec::parallel : Exec::serial;
  const MRFProblem pb = grid_problem(static_cast<int>(state.range(1)), 5);
  const DualState dual = make_dual_state(pb);
  const BinaryEnergy e = build_subproblem(pb, 0, dual);
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_marginals(e, exec));
  }
}

void BM_Maxflow(benchmark::State& state) {
  const MRFProblem pb = grid_problem(static_cast<int>(state.range(0)), 5);
  const DualState dual = make_dual_state(pb);
  const BinaryEnergy e = build_subproblem(pb, 0, dual);
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize(e));
  }
}

void BM_BruteForce(benchmark::State& state) {
  const Exec exec = state.range(0) ? Exec::parallel : Exec::serial;
  const MRFProblem pb = grid_problem(3, 4);  // 4^9 labelings
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_force(pb, exec));
  }
}

void BM_MmaSweep(benchmark::State& state) {
  const Exec exec = state.range(0) ? Exec::parallel : Exec::serial;
  const MRFProblem pb = grid_problem(8, 4);
  for (auto _ : state) {
    DualState dual = make_dual_state(pb);
    for (int j = 0; j < pb.node_count; ++j) mma_update(pb, dual, j, exec);
    benchmark::DoNotOptimize(dual.lambda);
  }
}

}  // namespace

BENCHMARK(BM_DualValue)->ArgsProduct({{0, 1}, {10, 20}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinMarginals)->ArgsProduct({{0, 1}, {10, 20, 30}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Maxflow)->Arg(20)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BruteForce)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MmaSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
