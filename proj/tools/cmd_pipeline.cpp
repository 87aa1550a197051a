// pipeline: simulate -> infer -> segment -> evaluate in one run. The
// default route feeds ground-truth trajectories straight into inference;
// --with-video inserts render -> detect -> link and scores the VIP-matched
// subset instead.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "anomdiff/csv.hpp"
#include "anomdiff/detect.hpp"
#include "anomdiff/link.hpp"
#include "anomdiff/render.hpp"
#include "commands.hpp"

namespace anomdiff::app {

namespace fs = std::filesystem;

namespace {

// Re-spread an estimate made on a tracked trajectory onto the truth clip's
// frame span. Frames the tracker missed take the nearest estimated frame.
ParamTrack align_to_truth(const ParamTrack& est, int tracked_start, int truth_start,
                          int truth_len) {
  ParamTrack out;
  out.alpha_t.resize(static_cast<std::size_t>(truth_len));
  out.k_t.resize(static_cast<std::size_t>(truth_len));
  out.state_t.resize(static_cast<std::size_t>(truth_len));
  const int last = est.length() - 1;
  for (int i = 0; i < truth_len; ++i) {
    const int j = std::clamp(truth_start + i - tracked_start, 0, last);
    out.alpha_t[static_cast<std::size_t>(i)] = est.alpha_t[static_cast<std::size_t>(j)];
    out.k_t[static_cast<std::size_t>(i)] = est.k_t[static_cast<std::size_t>(j)];
    out.state_t[static_cast<std::size_t>(i)] = est.state_t[static_cast<std::size_t>(j)];
  }
  return out;
}

EvaluationReport run_raw_route(const CliArgs& args, const ExperimentSpec& spec,
                               const ExperimentGroundTruth& gt) {
  const PipelineConfig& cfg = args.cfg;
  const std::string infer_dir = args.out_dir + "/infer/" + spec.name;
  const std::string segment_dir = args.out_dir + "/segment/" + spec.name;
  fs::create_directories(infer_dir);
  fs::create_directories(segment_dir);

  const std::vector<ParamTrack> tracks =
      run_infer(cfg, gt.trajectories, args.predictions_path, nullptr);
  write_file(infer_dir + "/params.csv", to_csv(tracks));

  const std::vector<SegmentedTrajectory> segs = run_segment(cfg, tracks);
  write_file(segment_dir + "/segments.csv", segments_to_csv(segs));
  if (!segs.empty()) {
    write_file(segment_dir + "/ensemble.json",
               ensemble_to_json(aggregate_ensemble(segs, cfg.force_two_states)));
  }
  return evaluate_experiment(segs, gt.truth_tracks, cfg.eps_cp);
}

EvaluationReport run_video_route(const CliArgs& args, const ExperimentSpec& spec,
                                 const std::vector<FovExperiment>& fovs,
                                 const std::string& sim_dir) {
  const PipelineConfig& cfg = args.cfg;
  std::vector<ParamTrack> predictions;
  std::vector<ParamTrack> truth_subset;

  for (const FovExperiment& fov : fovs) {
    const std::string fov_dir = sim_dir + "/" + fov_dir_name(fov.fov_id);
    const std::string track_dir =
        args.out_dir + "/track/" + spec.name + "/" + fov_dir_name(fov.fov_id);
    fs::create_directories(track_dir);

    const FrameStack stack = read_frame_stack(fov_dir + "/frames");
    const std::vector<Detection> detections = locate_stack(stack, cfg.detect);
    write_file(track_dir + "/detections.csv", detections_to_csv(detections));
    if (detections.empty()) {
      write_file(track_dir + "/trajectories.csv", to_csv(std::vector<Trajectory>{}));
      continue;
    }
    const std::vector<Trajectory> tracked = link(detections, cfg.link);
    write_file(track_dir + "/trajectories.csv", to_csv(tracked));

    const std::string vip_path = fov_dir + "/vip.pgm";
    if (!fs::exists(vip_path)) continue;
    const VipLabelFrame vip = VipLabelFrame::from_image(read_pgm(vip_path));
    const VipMatch match = match_vips(vip, tracked);
    std::map<int, int> rows = match.label_to_traj;
    for (int label : match.unmatched_labels) rows[label] = -1;
    write_file(track_dir + "/vip_map.csv", vip_map_to_csv(rows));

    const std::map<int, int> vip_truth = read_vip_map_csv(fov_dir + "/vip_truth.csv");

    for (const auto& [label, tracked_id] : match.label_to_traj) {
      const auto truth_it = vip_truth.find(label);
      if (truth_it == vip_truth.end()) continue;
      const int clip_id = truth_it->second;

      const Trajectory* tracked_traj = nullptr;
      for (const Trajectory& t : tracked) {
        if (t.id == tracked_id) tracked_traj = &t;
      }
      const Trajectory* truth_traj = nullptr;
      const ParamTrack* truth_track = nullptr;
      for (std::size_t i = 0; i < fov.trajectories.size(); ++i) {
        if (fov.trajectories[i].id == clip_id) {
          truth_traj = &fov.trajectories[i];
          truth_track = &fov.truth_tracks[i];
        }
      }
      if (!tracked_traj || !truth_traj || !truth_track) continue;

      const EstimateResult est = estimate_params_window(*tracked_traj, cfg.estimator);
      ParamTrack aligned = align_to_truth(est.track, tracked_traj->start_frame,
                                          truth_traj->start_frame, truth_traj->length());
      // FOV-qualified ids keep clips from different FOVs distinct.
      const int global_id = fov.fov_id * 100000 + clip_id;
      aligned.traj_id = global_id;
      predictions.push_back(std::move(aligned));
      ParamTrack truth_copy = *truth_track;
      truth_copy.traj_id = global_id;
      truth_subset.push_back(std::move(truth_copy));
    }
  }

  const std::string infer_dir = args.out_dir + "/infer/" + spec.name;
  const std::string segment_dir = args.out_dir + "/segment/" + spec.name;
  fs::create_directories(infer_dir);
  fs::create_directories(segment_dir);
  write_file(infer_dir + "/params.csv", to_csv(predictions));

  const std::vector<SegmentedTrajectory> segs = run_segment(cfg, predictions);
  write_file(segment_dir + "/segments.csv", segments_to_csv(segs));
  if (!segs.empty()) {
    write_file(segment_dir + "/ensemble.json",
               ensemble_to_json(aggregate_ensemble(segs, cfg.force_two_states)));
  }
  return evaluate_experiment(segs, truth_subset, cfg.eps_cp);
}

}  // namespace

int cmd_pipeline(const CliArgs& args) {
  const PipelineConfig& cfg = args.cfg;
  cfg.check_valid();
  if (cfg.predictor == "file" && cfg.with_video) {
    throw std::invalid_argument(
        "pipeline: predictor 'file' applies to the default route only; tracked ids "
        "cannot be reconciled against external predictions");
  }
  fs::create_directories(args.out_dir);

  const std::vector<ExperimentSpec> exps = experiment_list(cfg);
  std::vector<ExperimentReport> experiments(exps.size());
  std::atomic<long long> total_trajs{0};

  parallel_for(static_cast<int>(exps.size()), cfg.jobs, [&](int i) {
    const ExperimentSpec& spec = exps[static_cast<std::size_t>(i)];
    const std::string sim_dir = args.out_dir + "/sim/" + spec.name;
    std::vector<FovExperiment> fovs;
    const ExperimentGroundTruth gt =
        run_simulate_experiment(cfg, spec, sim_dir, nullptr, &fovs);
    total_trajs += static_cast<long long>(gt.trajectories.size());
    experiments[static_cast<std::size_t>(i)] = {
        spec.name, cfg.with_video ? run_video_route(args, spec, fovs, sim_dir)
                                  : run_raw_route(args, spec, gt)};
  });

  std::vector<EvaluationReport> reports;
  reports.reserve(experiments.size());
  for (const auto& e : experiments) reports.push_back(e.report);
  const EvaluationReport combined = combine_reports(reports);

  InputChecksums inputs;
  if (!args.config_path.empty()) inputs = checksum_files({args.config_path});
  write_file(args.out_dir + "/report.json",
             report_to_json(experiments, combined, config_to_json(cfg), inputs));
  write_file(args.out_dir + "/report.csv", report_to_csv(experiments));
  write_run_json(args.out_dir + "/run.json", "pipeline", cfg, inputs,
                 {args.out_dir + "/report.json", args.out_dir + "/report.csv"});

  std::fprintf(stderr, "pipeline: %zu experiment(s), combined alpha MAE %.4f -> %s\n",
               exps.size(), combined.mae_alpha, args.out_dir.c_str());
  if (total_trajs.load() == 0) {
    std::fprintf(stderr, "pipeline: empty result (no particles drawn)\n");
    return kEmpty;
  }
  return kOk;
}

}  // namespace anomdiff::app
