#include <benchmark/benchmark.h>

#include <vector>

#include "anomdiff/detect.hpp"
#include "anomdiff/render.hpp"
#include "anomdiff/rng.hpp"
#include "anomdiff/types.hpp"

namespace {

// A rendered 128 px frame with the given particle count, shared per run.
anomdiff::FrameStack make_frame(int n_particles) {
  anomdiff::Rng rng(7);
  std::vector<anomdiff::Trajectory> trajs(static_cast<std::size_t>(n_particles));
  for (int i = 0; i < n_particles; ++i) {
    trajs[static_cast<std::size_t>(i)].id = i;
    trajs[static_cast<std::size_t>(i)].points.push_back(
        {rng.uniform(5.0, 123.0), rng.uniform(5.0, 123.0)});
  }
  anomdiff::RenderConfig cfg;
  return anomdiff::render_frames(trajs, 1, 128, cfg, rng);
}

void BM_Locate(benchmark::State& state) {
  const anomdiff::FrameStack stack = make_frame(static_cast<int>(state.range(0)));
  const anomdiff::DetectConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(anomdiff::locate_stack(stack, cfg));
  }
}
BENCHMARK(BM_Locate)->Arg(10)->Arg(40)->Arg(64);

}  // namespace
