#include <benchmark/benchmark.h>

#include "topolearn/distributions.hpp"

namespace {

using namespace topolearn::dist;

void BM_Chi2InvUpper(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(chi2_inv_upper(1e-3, d));
}
BENCHMARK(BM_Chi2InvUpper)->Arg(2)->Arg(12)->Arg(110);

void BM_FInvUpper(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(f_inv_upper(1e-3, 8, 2975));
}
BENCHMARK(BM_FInvUpper);

void BM_NoncentralChi2Sf(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(noncentral_chi2_sf(40.0, 12, 25.0));
}
BENCHMARK(BM_NoncentralChi2Sf);

void BM_MarcumQ1(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(marcum_q1(3.0, 4.5));
}
BENCHMARK(BM_MarcumQ1);

}  // namespace
