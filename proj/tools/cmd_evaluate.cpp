// evaluate: challenge metrics for predictions against ground truth, one
// report row per experiment plus the combined summary.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anomdiff/csv.hpp"
#include "commands.hpp"

namespace anomdiff::app {

namespace fs = std::filesystem;

namespace {

struct ExperimentPair {
  std::string name;
  std::string pred_file;
  std::string truth_file;
};

// Directory mode pairs each pred subdirectory with the same-named truth
// subdirectory; file mode is a single unnamed experiment.
std::vector<ExperimentPair> resolve_pairs(const CliArgs& args) {
  std::vector<ExperimentPair> out;
  const std::string pred_leaf =
      args.pred_format == "params" ? "params.csv" : "segments.csv";
  if (fs::is_directory(args.pred_path)) {
    if (!fs::is_directory(args.truth_path)) {
      throw std::invalid_argument(
          "evaluate: --pred is a directory, so --truth must be one as well");
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(args.pred_path)) {
      if (!entry.is_directory()) continue;
      const std::string name = entry.path().filename().string();
      const fs::path pred_file = entry.path() / pred_leaf;
      const fs::path truth_file = fs::path(args.truth_path) / name / "truth_params.csv";
      if (fs::exists(pred_file) && fs::exists(truth_file)) names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      out.push_back({name, (fs::path(args.pred_path) / name / pred_leaf).string(),
                     (fs::path(args.truth_path) / name / "truth_params.csv").string()});
    }
  } else {
    out.push_back({"exp0", args.pred_path, args.truth_path});
  }
  return out;
}

std::vector<SegmentedTrajectory> load_predicted_segments(const std::string& path,
                                                         const std::string& format) {
  if (format == "params") {
    const std::vector<ParamTrack> tracks = read_param_tracks_csv(path);
    std::vector<SegmentedTrajectory> out;
    out.reserve(tracks.size());
    for (const ParamTrack& t : tracks) out.push_back(exact_segments(t));
    return out;
  }
  return read_segments_csv(path);
}

}  // namespace

int cmd_evaluate(const CliArgs& args) {
  const PipelineConfig& cfg = args.cfg;
  cfg.check_valid();
  if (args.pred_format != "segments" && args.pred_format != "params") {
    throw std::invalid_argument("evaluate: --pred-format must be 'segments' or 'params'");
  }
  fs::create_directories(args.out_dir);

  const std::vector<ExperimentPair> pairs = resolve_pairs(args);
  if (pairs.empty()) {
    std::fprintf(stderr, "evaluate: no matching experiment directories under %s and %s\n",
                 args.pred_path.c_str(), args.truth_path.c_str());
    return kEmpty;
  }

  std::vector<ExperimentReport> experiments(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), cfg.jobs, [&](int i) {
    const ExperimentPair& p = pairs[static_cast<std::size_t>(i)];
    const std::vector<SegmentedTrajectory> preds =
        load_predicted_segments(p.pred_file, args.pred_format);
    const std::vector<ParamTrack> truth = read_param_tracks_csv(p.truth_file);
    experiments[static_cast<std::size_t>(i)] = {
        p.name, evaluate_experiment(preds, truth, cfg.eps_cp)};
  });

  std::vector<EvaluationReport> reports;
  reports.reserve(experiments.size());
  for (const auto& e : experiments) reports.push_back(e.report);
  const EvaluationReport combined = combine_reports(reports);

  std::vector<std::string> input_paths;
  if (!args.config_path.empty()) input_paths.push_back(args.config_path);
  for (const auto& p : pairs) {
    input_paths.push_back(p.pred_file);
    input_paths.push_back(p.truth_file);
  }
  const InputChecksums inputs = checksum_files(input_paths);

  write_file(args.out_dir + "/report.json",
             report_to_json(experiments, combined, config_to_json(cfg), inputs));
  write_file(args.out_dir + "/report.csv", report_to_csv(experiments));

  std::fprintf(stderr, "evaluate: %zu experiment(s) -> %s/report.json\n", pairs.size(),
               args.out_dir.c_str());
  return kOk;
}

}  // namespace anomdiff::app
