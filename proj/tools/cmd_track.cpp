// track: locate spots in a frame stack and link them into trajectories,
// optionally resolving a VIP label frame to trajectory ids.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anomdiff/csv.hpp"
#include "anomdiff/detect.hpp"
#include "anomdiff/link.hpp"
#include "anomdiff/render.hpp"
#include "commands.hpp"

namespace anomdiff::app {

namespace fs = std::filesystem;

int cmd_track(const CliArgs& args) {
  const PipelineConfig& cfg = args.cfg;
  cfg.check_valid();
  fs::create_directories(args.out_dir);

  const FrameStack stack = read_frame_stack(args.frames_dir);
  const std::vector<Detection> detections = locate_stack(stack, cfg.detect);

  std::vector<std::string> outputs;
  auto emit = [&](const std::string& rel, const std::string& contents) {
    const std::string path = args.out_dir + "/" + rel;
    write_file(path, contents);
    outputs.push_back(path);
  };

  std::vector<std::string> input_paths = {args.frames_dir + "/index.json"};
  if (!args.vip_path.empty()) input_paths.push_back(args.vip_path);
  if (!args.config_path.empty()) input_paths.insert(input_paths.begin(), args.config_path);

  if (detections.empty()) {
    emit("detections.csv", detections_to_csv({}));
    emit("trajectories.csv", to_csv(std::vector<Trajectory>{}));
    write_run_json(args.out_dir + "/run.json", "track", cfg, checksum_files(input_paths), outputs);
    std::fprintf(stderr, "track: no detections in %s\n", args.frames_dir.c_str());
    return kEmpty;
  }

  const std::vector<Trajectory> trajs = link(detections, cfg.link);
  emit("detections.csv", detections_to_csv(detections));
  emit("trajectories.csv", to_csv(trajs));

  if (!args.vip_path.empty()) {
    const VipLabelFrame vip = VipLabelFrame::from_image(read_pgm(args.vip_path));
    const VipMatch match = match_vips(vip, trajs);
    // One row per label; unmatched labels carry traj_id -1.
    std::map<int, int> rows = match.label_to_traj;
    for (int label : match.unmatched_labels) rows[label] = -1;
    emit("vip_map.csv", vip_map_to_csv(rows));
  }

  write_run_json(args.out_dir + "/run.json", "track", cfg, checksum_files(input_paths), outputs);
  std::fprintf(stderr, "track: %zu detection(s), %zu trajectorie(s) -> %s\n", detections.size(),
               trajs.size(), args.out_dir.c_str());
  return kOk;
}

}  // namespace anomdiff::app
