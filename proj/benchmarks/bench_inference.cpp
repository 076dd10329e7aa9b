#include <benchmark/benchmark.h>

#include "topolearn/baselines.hpp"
#include "topolearn/detector.hpp"
#include "topolearn/empirical.hpp"
#include "topolearn/markov.hpp"
#include "topolearn/netsim.hpp"

namespace {

using namespace topolearn;

McParams chain_params() { return mc_from_physical(5e-6, 1e-3, 10e-3, 1e-3, 10e-3, 50e-6, 50e-6, 0.0, 0.5); }

void BM_JointCounts(benchmark::State& state) {
  const ActivityTrace t = simulate_chain(chain_params(), state.range(0), 7);
  for (auto _ : state) benchmark::DoNotOptimize(joint_counts(t, 1, 2, 10));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JointCounts)->RangeMultiplier(2)->Range(1 << 18, 1 << 22)->Complexity(benchmark::oN);

void BM_TestLink(benchmark::State& state) {
  const ActivityTrace t = simulate_chain(chain_params(), 1000000, 7);
  AtelnetParams p;
  p.tau_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(test_link(t, 1, 2, p));
}
BENCHMARK(BM_TestLink)->DenseRange(4, 10, 2);

const ActivityTrace& infra_trace() {
  static const ActivityTrace t = simulate_network(make_scenario("infra2ap"), 1.0, 3).trace;
  return t;
}

void BM_InferAtelnet(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(infer_topology(infra_trace(), {}, 1));
}
BENCHMARK(BM_InferAtelnet)->Unit(benchmark::kMillisecond);

void BM_InferLinear(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(linear_asym_topology(infra_trace(), 3, 1e-3, 1));
}
BENCHMARK(BM_InferLinear)->Unit(benchmark::kMillisecond);

void BM_HardFusion(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(hard_fusion(infra_trace(), {}, 1));
}
BENCHMARK(BM_HardFusion)->Unit(benchmark::kMillisecond);

}  // namespace
