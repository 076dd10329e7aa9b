#include <benchmark/benchmark.h>

#include "topolearn/markov.hpp"
#include "topolearn/netsim.hpp"

namespace {

using namespace topolearn;

void BM_SimulateChain(benchmark::State& state) {
  const McParams p = mc_from_physical(5e-6, 1e-3, 10e-3, 1e-3, 10e-3, 50e-6, 50e-6, 0.0, 0.5);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_chain(p, state.range(0), seed++));
}
BENCHMARK(BM_SimulateChain)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_SimulateInfra(benchmark::State& state) {
  ScenarioKnobs k;
  k.sta_per_ap = static_cast<int>(state.range(0));
  const NetConfig cfg = make_scenario("infra2ap", k);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_network(cfg, 1.0, seed++));
}
BENCHMARK(BM_SimulateInfra)->Arg(1)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SteadyStateNumeric(benchmark::State& state) {
  const McParams p = mc_from_physical(5e-6, 1e-3, 10e-3, 1e-3, 10e-3, 50e-6, 50e-6, 0.3, 0.5);
  const McMatrix m = transition_matrix(p);
  for (auto _ : state) benchmark::DoNotOptimize(steady_state_numeric(m));
}
BENCHMARK(BM_SteadyStateNumeric);

}  // namespace
