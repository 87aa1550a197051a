#include <benchmark/benchmark.h>

#include "anomdiff/fbm.hpp"
#include "anomdiff/rng.hpp"
#include "anomdiff/types.hpp"

namespace {

void BM_FbmDisplacements(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const anomdiff::DiffusionParams params(0.7, 1.0);
  anomdiff::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(anomdiff::sample_fbm_displacements(n, params, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FbmDisplacements)->Arg(208)->Arg(1024)->Arg(8192);

void BM_FgnBrownian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  anomdiff::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(anomdiff::sample_fgn(n, 0.5, 1.0, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FgnBrownian)->Arg(208)->Arg(8192);

}  // namespace
