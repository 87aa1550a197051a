// simulate: ground-truth generation. render: frame stacks for an already
// simulated experiment directory.
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anomdiff/csv.hpp"
#include "commands.hpp"

namespace anomdiff::app {

namespace fs = std::filesystem;

namespace {

InputChecksums config_input(const CliArgs& args) {
  if (args.config_path.empty()) return {};
  return checksum_files({args.config_path});
}

// fov_07 -> 7; directories that do not match yield -1.
int fov_id_from_name(const std::string& name) {
  if (name.rfind("fov_", 0) != 0) return -1;
  int value = 0;
  bool any = false;
  for (std::size_t i = 4; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return -1;
    value = value * 10 + (name[i] - '0');
    any = true;
  }
  return any ? value : -1;
}

}  // namespace

int cmd_simulate(const CliArgs& args) {
  const PipelineConfig& cfg = args.cfg;
  cfg.check_valid();
  fs::create_directories(args.out_dir);

  const std::vector<ExperimentSpec> exps = experiment_list(cfg);
  std::vector<std::vector<std::string>> outputs(exps.size());
  std::atomic<long long> total_trajs{0};

  parallel_for(static_cast<int>(exps.size()), cfg.jobs, [&](int i) {
    const ExperimentSpec& spec = exps[static_cast<std::size_t>(i)];
    const std::string exp_dir = args.out_dir + "/" + spec.name;
    ExperimentGroundTruth gt =
        run_simulate_experiment(cfg, spec, exp_dir, &outputs[static_cast<std::size_t>(i)]);
    total_trajs += static_cast<long long>(gt.trajectories.size());
  });

  std::vector<std::string> all_outputs;
  for (const auto& chunk : outputs) {
    all_outputs.insert(all_outputs.end(), chunk.begin(), chunk.end());
  }
  write_run_json(args.out_dir + "/run.json", "simulate", cfg, config_input(args), all_outputs);

  std::fprintf(stderr, "simulate: %zu experiment(s), %lld trajectorie(s) -> %s\n", exps.size(),
               total_trajs.load(), args.out_dir.c_str());
  if (total_trajs.load() == 0) {
    std::fprintf(stderr, "simulate: empty result (no particles drawn)\n");
    return kEmpty;
  }
  return kOk;
}

int cmd_render(const CliArgs& args) {
  const PipelineConfig& cfg = args.cfg;
  cfg.check_valid();

  // Collect FOV directories: fov_* children, or in_dir itself when it
  // already holds trajectories.csv.
  std::vector<std::pair<std::string, int>> fov_dirs;
  if (fs::exists(fs::path(args.in_dir) / "trajectories.csv") &&
      fov_id_from_name(fs::path(args.in_dir).filename().string()) >= 0) {
    fov_dirs.emplace_back(args.in_dir,
                          fov_id_from_name(fs::path(args.in_dir).filename().string()));
  } else if (fs::is_directory(args.in_dir)) {
    for (const auto& entry : fs::directory_iterator(args.in_dir)) {
      if (!entry.is_directory()) continue;
      const int id = fov_id_from_name(entry.path().filename().string());
      if (id < 0) continue;
      if (!fs::exists(entry.path() / "trajectories.csv")) continue;
      fov_dirs.emplace_back(entry.path().string(), id);
    }
  }
  std::sort(fov_dirs.begin(), fov_dirs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });

  if (fov_dirs.empty()) {
    std::fprintf(stderr, "render: no FOV directories with trajectories.csv under %s\n",
                 args.in_dir.c_str());
    return kEmpty;
  }

  std::vector<std::vector<std::string>> outputs(fov_dirs.size());
  std::vector<std::string> inputs_list;
  for (const auto& [dir, id] : fov_dirs) inputs_list.push_back(dir + "/trajectories.csv");

  parallel_for(static_cast<int>(fov_dirs.size()), cfg.jobs, [&](int i) {
    const auto& [dir, id] = fov_dirs[static_cast<std::size_t>(i)];
    const std::vector<Trajectory> trajs = read_trajectories_csv(dir + "/trajectories.csv");
    outputs[static_cast<std::size_t>(i)] =
        run_render_fov(cfg, trajs, dir, id, static_cast<std::uint64_t>(id));
  });

  std::vector<std::string> all_outputs;
  for (const auto& chunk : outputs) {
    all_outputs.insert(all_outputs.end(), chunk.begin(), chunk.end());
  }
  InputChecksums inputs = config_input(args);
  for (const auto& [name, digest] : checksum_files(inputs_list)) inputs.emplace_back(name, digest);
  write_run_json(args.in_dir + "/run.json", "render", cfg, inputs, all_outputs);

  std::fprintf(stderr, "render: %zu FOV(s) -> %s\n", fov_dirs.size(), args.in_dir.c_str());
  return kOk;
}

}  // namespace anomdiff::app
