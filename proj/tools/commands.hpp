#pragma once

#include <string>

#include "app.hpp"

namespace anomdiff::app {

// Everything the argument parser resolved for one invocation: the merged
// configuration plus the per-command paths.
struct CliArgs {
  PipelineConfig cfg;
  std::string config_path;  // --config as given; already merged into cfg

  std::string out_dir;           // simulate, track, infer, segment, evaluate, pipeline
  std::string in_dir;            // render: experiment directory
  std::string frames_dir;        // track
  std::string vip_path;          // track
  std::string traj_path;         // infer
  std::string predictions_path;  // infer, pipeline (predictor = file)
  std::string params_path;       // segment
  std::string pred_path;         // evaluate
  std::string truth_path;        // evaluate
  std::string pred_format = "segments";  // evaluate: segments | params
};

int cmd_simulate(const CliArgs& args);
int cmd_render(const CliArgs& args);
int cmd_track(const CliArgs& args);
int cmd_infer(const CliArgs& args);
int cmd_segment(const CliArgs& args);
int cmd_evaluate(const CliArgs& args);
int cmd_pipeline(const CliArgs& args);

}  // namespace anomdiff::app
