#include <benchmark/benchmark.h>

#include <vector>

#include "anomdiff/link.hpp"
#include "anomdiff/rng.hpp"

namespace {

void BM_Assignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  anomdiff::Rng rng(3);
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n)));
  for (auto& row : cost) {
    for (double& v : row) v = rng.uniform(0.0, 100.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(anomdiff::solve_assignment(cost));
  }
}
BENCHMARK(BM_Assignment)->Arg(8)->Arg(32)->Arg(64)->Arg(128);

void BM_Link(benchmark::State& state) {
  const int n_particles = static_cast<int>(state.range(0));
  const int n_frames = 50;
  anomdiff::Rng rng(5);
  std::vector<anomdiff::Detection> detections;
  std::vector<double> xs(static_cast<std::size_t>(n_particles)),
      ys(static_cast<std::size_t>(n_particles));
  for (int i = 0; i < n_particles; ++i) {
    xs[static_cast<std::size_t>(i)] = rng.uniform(0.0, 128.0);
    ys[static_cast<std::size_t>(i)] = rng.uniform(0.0, 128.0);
  }
  for (int f = 0; f < n_frames; ++f) {
    for (int i = 0; i < n_particles; ++i) {
      auto& x = xs[static_cast<std::size_t>(i)];
      auto& y = ys[static_cast<std::size_t>(i)];
      x += rng.normal(0.0, 0.5);
      y += rng.normal(0.0, 0.5);
      detections.push_back({f, x, y, 20.0});
    }
  }
  const anomdiff::LinkConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(anomdiff::link(detections, cfg));
  }
  state.SetItemsProcessed(state.iterations() * detections.size());
}
BENCHMARK(BM_Link)->Arg(16)->Arg(64);

}  // namespace
