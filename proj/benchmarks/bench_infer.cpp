#include <benchmark/benchmark.h>

#include "anomdiff/fbm.hpp"
#include "anomdiff/infer.hpp"
#include "anomdiff/rng.hpp"
#include "anomdiff/types.hpp"

namespace {

anomdiff::Trajectory make_trajectory(int length) {
  anomdiff::Rng rng(13);
  const anomdiff::DiffusionParams params(0.8, 1.0);
  const anomdiff::Displacements d =
      anomdiff::sample_fbm_displacements(length - 1, params, rng);
  anomdiff::Trajectory traj;
  traj.id = 0;
  double x = 0.0, y = 0.0;
  traj.points.push_back({x, y});
  for (std::size_t t = 0; t + 1 < static_cast<std::size_t>(length); ++t) {
    x += d.dx[t];
    y += d.dy[t];
    traj.points.push_back({x, y});
  }
  return traj;
}

void BM_EstimateWindow(benchmark::State& state) {
  const anomdiff::Trajectory traj = make_trajectory(static_cast<int>(state.range(0)));
  const anomdiff::EstimatorConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(anomdiff::estimate_params_window(traj, cfg));
  }
  state.SetItemsProcessed(state.iterations() * traj.length());
}
BENCHMARK(BM_EstimateWindow)->Arg(208)->Arg(1024);

}  // namespace
