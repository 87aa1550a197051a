#include <benchmark/benchmark.h>

#include <vector>

#include "anomdiff/rng.hpp"
#include "anomdiff/segment.hpp"

namespace {

// Piecewise-constant series with noise, four equal segments.
std::vector<double> make_series(int n) {
  anomdiff::Rng rng(11);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double level = static_cast<double>((4 * i / n) % 2) * 3.0;
    out[static_cast<std::size_t>(i)] = level + rng.normal(0.0, 0.4);
  }
  return out;
}

void bench_algorithm(benchmark::State& state, anomdiff::CpAlgorithm algo) {
  const std::vector<double> series = make_series(static_cast<int>(state.range(0)));
  anomdiff::CpConfig cfg;
  cfg.algorithm = algo;
  for (auto _ : state) {
    benchmark::DoNotOptimize(anomdiff::detect_changepoints(series, cfg));
  }
  state.SetItemsProcessed(state.iterations() * series.size());
}

void BM_Pelt(benchmark::State& state) { bench_algorithm(state, anomdiff::CpAlgorithm::Pelt); }
void BM_BinSeg(benchmark::State& state) { bench_algorithm(state, anomdiff::CpAlgorithm::BinSeg); }
void BM_Window(benchmark::State& state) { bench_algorithm(state, anomdiff::CpAlgorithm::Window); }

BENCHMARK(BM_Pelt)->Arg(208)->Arg(1024);
BENCHMARK(BM_BinSeg)->Arg(208)->Arg(1024);
BENCHMARK(BM_Window)->Arg(208)->Arg(1024);

}  // namespace
