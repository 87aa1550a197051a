// infer: per-frame (alpha, K, state) for each trajectory. segment: reduce
// inferred tracks to piecewise-constant segments plus an ensemble summary.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anomdiff/csv.hpp"
#include "commands.hpp"

namespace anomdiff::app {

namespace fs = std::filesystem;

int cmd_infer(const CliArgs& args) {
  const PipelineConfig& cfg = args.cfg;
  cfg.check_valid();
  fs::create_directories(args.out_dir);

  std::vector<std::string> input_paths;
  if (!args.config_path.empty()) input_paths.push_back(args.config_path);
  input_paths.push_back(args.traj_path);
  if (cfg.predictor == "file") input_paths.push_back(args.predictions_path);

  const std::vector<Trajectory> trajs = read_trajectories_csv(args.traj_path);
  if (trajs.empty()) {
    write_file(args.out_dir + "/params.csv", to_csv(std::vector<ParamTrack>{}));
    write_run_json(args.out_dir + "/run.json", "infer", cfg, checksum_files(input_paths),
                   {args.out_dir + "/params.csv"});
    std::fprintf(stderr, "infer: no trajectories in %s\n", args.traj_path.c_str());
    return kEmpty;
  }

  int low_confidence = 0;
  const std::vector<ParamTrack> tracks =
      run_infer(cfg, trajs, args.predictions_path, &low_confidence);
  write_file(args.out_dir + "/params.csv", to_csv(tracks));
  write_run_json(args.out_dir + "/run.json", "infer", cfg, checksum_files(input_paths),
                 {args.out_dir + "/params.csv"});
  std::fprintf(stderr, "infer: %zu track(s), %d low-confidence -> %s\n", tracks.size(),
               low_confidence, args.out_dir.c_str());
  return kOk;
}

int cmd_segment(const CliArgs& args) {
  const PipelineConfig& cfg = args.cfg;
  cfg.check_valid();
  fs::create_directories(args.out_dir);

  std::vector<std::string> input_paths;
  if (!args.config_path.empty()) input_paths.push_back(args.config_path);
  input_paths.push_back(args.params_path);

  const std::vector<ParamTrack> tracks = read_param_tracks_csv(args.params_path);
  if (tracks.empty()) {
    write_file(args.out_dir + "/segments.csv", segments_to_csv({}));
    write_run_json(args.out_dir + "/run.json", "segment", cfg, checksum_files(input_paths),
                   {args.out_dir + "/segments.csv"});
    std::fprintf(stderr, "segment: no tracks in %s\n", args.params_path.c_str());
    return kEmpty;
  }

  const std::vector<SegmentedTrajectory> segs = run_segment(cfg, tracks);
  const EnsembleSummary ensemble = aggregate_ensemble(segs, cfg.force_two_states);

  write_file(args.out_dir + "/segments.csv", segments_to_csv(segs));
  write_file(args.out_dir + "/ensemble.json", ensemble_to_json(ensemble));
  write_run_json(args.out_dir + "/run.json", "segment", cfg, checksum_files(input_paths),
                 {args.out_dir + "/segments.csv", args.out_dir + "/ensemble.json"});
  std::fprintf(stderr, "segment: %zu trajectorie(s), %d ensemble state(s) -> %s\n", segs.size(),
               ensemble.n_states, args.out_dir.c_str());
  return kOk;
}

}  // namespace anomdiff::app
