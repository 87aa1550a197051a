#include "app.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "anomdiff/csv.hpp"
#include "anomdiff/rng.hpp"
#include "json.hpp"

namespace anomdiff::app {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void PipelineConfig::check_valid() const {
  if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
  if (per_model < 0) throw std::invalid_argument("config: per_model must be >= 0");
  if (vips < 0 || vips > 255) throw std::invalid_argument("config: vips must be in [0, 255]");
  if (predictor != "msd" && predictor != "file") {
    throw std::invalid_argument("config: predictor must be 'msd' or 'file'");
  }
  if (!(eps_cp > 0.0)) throw std::invalid_argument("config: eps_cp must be positive");
  sim.check_valid();
  render.check_valid();
  detect.check_valid();
  link.check_valid();
  estimator.check_valid();
  cp.check_valid();
}

namespace {

ordered_json sim_to_json(const SimConfig& c) {
  ordered_json j;
  j["model"] = to_string(c.model_kind);
  j["field_size"] = c.field_size;
  j["fov_size"] = c.fov_size;
  j["n_frames"] = c.n_frames;
  j["max_particles_per_fov"] = c.max_particles_per_fov;
  j["mean_particles"] = c.mean_particles;
  j["sigma_alpha"] = c.sigma_alpha;
  j["sigma_k"] = c.sigma_k;
  j["directed_alpha_threshold"] = c.directed_alpha_threshold;
  j["msm"] = {{"n_states", c.msm.n_states}, {"mean_dwell", c.msm.mean_dwell}};
  j["dim"] = {{"r_bind", c.dim.r_bind},
              {"p_bind", c.dim.p_bind},
              {"p_unbind", c.dim.p_unbind},
              {"k_scale", c.dim.k_scale}};
  j["tcm"] = {{"n_compartments", c.tcm.n_compartments},
              {"radius", c.tcm.radius},
              {"transmittance", c.tcm.transmittance},
              {"k_scale", c.tcm.k_scale}};
  j["qtm"] = {{"n_traps", c.qtm.n_traps},
              {"radius", c.qtm.radius},
              {"p_escape", c.qtm.p_escape}};
  return j;
}

void sim_from_json(const ordered_json& j, SimConfig& c) {
  if (j.contains("model")) c.model_kind = model_kind_from_string(j.at("model").get<std::string>());
  c.field_size = j.value("field_size", c.field_size);
  c.fov_size = j.value("fov_size", c.fov_size);
  c.n_frames = j.value("n_frames", c.n_frames);
  c.max_particles_per_fov = j.value("max_particles_per_fov", c.max_particles_per_fov);
  c.mean_particles = j.value("mean_particles", c.mean_particles);
  c.sigma_alpha = j.value("sigma_alpha", c.sigma_alpha);
  c.sigma_k = j.value("sigma_k", c.sigma_k);
  c.directed_alpha_threshold = j.value("directed_alpha_threshold", c.directed_alpha_threshold);
  if (j.contains("msm")) {
    const auto& m = j.at("msm");
    c.msm.n_states = m.value("n_states", c.msm.n_states);
    c.msm.mean_dwell = m.value("mean_dwell", c.msm.mean_dwell);
  }
  if (j.contains("dim")) {
    const auto& m = j.at("dim");
    c.dim.r_bind = m.value("r_bind", c.dim.r_bind);
    c.dim.p_bind = m.value("p_bind", c.dim.p_bind);
    c.dim.p_unbind = m.value("p_unbind", c.dim.p_unbind);
    c.dim.k_scale = m.value("k_scale", c.dim.k_scale);
  }
  if (j.contains("tcm")) {
    const auto& m = j.at("tcm");
    c.tcm.n_compartments = m.value("n_compartments", c.tcm.n_compartments);
    c.tcm.radius = m.value("radius", c.tcm.radius);
    c.tcm.transmittance = m.value("transmittance", c.tcm.transmittance);
    c.tcm.k_scale = m.value("k_scale", c.tcm.k_scale);
  }
  if (j.contains("qtm")) {
    const auto& m = j.at("qtm");
    c.qtm.n_traps = m.value("n_traps", c.qtm.n_traps);
    c.qtm.radius = m.value("radius", c.qtm.radius);
    c.qtm.p_escape = m.value("p_escape", c.qtm.p_escape);
  }
}

ordered_json full_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  j["per_model"] = cfg.per_model;
  j["fovs"] = cfg.fovs;
  j["with_video"] = cfg.with_video;
  j["vips"] = cfg.vips;
  j["predictor"] = cfg.predictor;
  j["force_two_states"] = cfg.force_two_states;
  j["eps_cp"] = cfg.eps_cp;
  j["sim"] = sim_to_json(cfg.sim);
  j["render"] = {{"psf_sigma", cfg.render.psf_sigma},
                 {"particle_intensity", cfg.render.particle_intensity},
                 {"background", cfg.render.background},
                 {"noise_sigma", cfg.render.noise_sigma},
                 {"bit_depth", cfg.render.bit_depth}};
  j["detect"] = {{"diameter", cfg.detect.diameter},
                 {"minmass", cfg.detect.minmass},
                 {"separation", cfg.detect.separation},
                 {"border_pad", cfg.detect.border_pad}};
  j["link"] = {{"search_range", cfg.link.search_range}, {"memory", cfg.link.memory}};
  j["estimator"] = {{"window", cfg.estimator.window},
                    {"min_lags", cfg.estimator.min_lags},
                    {"k_immobile", cfg.estimator.k_immobile},
                    {"alpha_directed", cfg.estimator.alpha_directed},
                    {"confinement_radius", cfg.estimator.confinement_radius}};
  j["cp"] = {{"algorithm", to_string(cfg.cp.algorithm)},
             {"cost", to_string(cfg.cp.cost)},
             {"penalty", cfg.cp.penalty},
             {"window_width", cfg.cp.window_width},
             {"min_segment", cfg.cp.min_segment}};
  return j;
}

void full_from_json(const ordered_json& j, PipelineConfig& cfg) {
  cfg.seed = j.value("seed", cfg.seed);
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.per_model = j.value("per_model", cfg.per_model);
  cfg.fovs = j.value("fovs", cfg.fovs);
  cfg.with_video = j.value("with_video", cfg.with_video);
  cfg.vips = j.value("vips", cfg.vips);
  cfg.predictor = j.value("predictor", cfg.predictor);
  cfg.force_two_states = j.value("force_two_states", cfg.force_two_states);
  cfg.eps_cp = j.value("eps_cp", cfg.eps_cp);
  if (j.contains("sim")) sim_from_json(j.at("sim"), cfg.sim);
  if (j.contains("render")) {
    const auto& m = j.at("render");
    cfg.render.psf_sigma = m.value("psf_sigma", cfg.render.psf_sigma);
    cfg.render.particle_intensity = m.value("particle_intensity", cfg.render.particle_intensity);
    cfg.render.background = m.value("background", cfg.render.background);
    cfg.render.noise_sigma = m.value("noise_sigma", cfg.render.noise_sigma);
    cfg.render.bit_depth = m.value("bit_depth", cfg.render.bit_depth);
  }
  if (j.contains("detect")) {
    const auto& m = j.at("detect");
    cfg.detect.diameter = m.value("diameter", cfg.detect.diameter);
    cfg.detect.minmass = m.value("minmass", cfg.detect.minmass);
    cfg.detect.separation = m.value("separation", cfg.detect.separation);
    cfg.detect.border_pad = m.value("border_pad", cfg.detect.border_pad);
  }
  if (j.contains("link")) {
    const auto& m = j.at("link");
    cfg.link.search_range = m.value("search_range", cfg.link.search_range);
    cfg.link.memory = m.value("memory", cfg.link.memory);
  }
  if (j.contains("estimator")) {
    const auto& m = j.at("estimator");
    cfg.estimator.window = m.value("window", cfg.estimator.window);
    cfg.estimator.min_lags = m.value("min_lags", cfg.estimator.min_lags);
    cfg.estimator.k_immobile = m.value("k_immobile", cfg.estimator.k_immobile);
    cfg.estimator.alpha_directed = m.value("alpha_directed", cfg.estimator.alpha_directed);
    cfg.estimator.confinement_radius =
        m.value("confinement_radius", cfg.estimator.confinement_radius);
  }
  if (j.contains("cp")) {
    const auto& m = j.at("cp");
    if (m.contains("algorithm")) {
      cfg.cp.algorithm = cp_algorithm_from_string(m.at("algorithm").get<std::string>());
    }
    if (m.contains("cost")) cfg.cp.cost = cp_cost_from_string(m.at("cost").get<std::string>());
    cfg.cp.penalty = m.value("penalty", cfg.cp.penalty);
    cfg.cp.window_width = m.value("window_width", cfg.cp.window_width);
    cfg.cp.min_segment = m.value("min_segment", cfg.cp.min_segment);
  }
}

}  // namespace

std::string fov_dir_name(int fov_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fov_%02d", fov_id);
  return buf;
}

std::string config_to_json(const PipelineConfig& cfg) { return full_to_json(cfg).dump(2) + "\n"; }

void config_from_json_file(const std::string& path, PipelineConfig& cfg) {
  const std::string text = read_file(path);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error(path + ": config root must be a JSON object");
  full_from_json(j, cfg);
}

std::uint64_t stage_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t item) {
  return Rng(root).split(stream).split(item).next_u64();
}

void write_run_json(const std::string& path, const std::string& command,
                    const PipelineConfig& cfg, const InputChecksums& inputs,
                    const std::vector<std::string>& output_paths) {
  ordered_json j;
  j["command"] = command;
  j["config"] = full_to_json(cfg);
  ordered_json in = ordered_json::object();
  for (const auto& [name, digest] : inputs) in[name] = digest;
  j["inputs"] = in;
  ordered_json out = ordered_json::object();
  const fs::path base = fs::path(path).parent_path();
  for (const auto& p : output_paths) {
    // Keys are relative to the run.json location when possible.
    std::string key = p;
    std::error_code ec;
    const fs::path rel = fs::relative(p, base, ec);
    if (!ec && !rel.empty()) key = rel.generic_string();
    out[key] = checksum_file(p);
  }
  j["outputs"] = out;
  write_file(path, j.dump(2) + "\n");
}

InputChecksums checksum_files(const std::vector<std::string>& paths) {
  InputChecksums out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.emplace_back(p, checksum_file(p));
  return out;
}

std::vector<ExperimentSpec> experiment_list(const PipelineConfig& cfg) {
  std::vector<ExperimentSpec> out;
  if (cfg.per_model <= 0) {
    out.push_back({to_string(cfg.sim.model_kind), cfg.sim.model_kind, 0});
    return out;
  }
  static constexpr ModelKind kAll[] = {ModelKind::SSM, ModelKind::MSM, ModelKind::DIM,
                                       ModelKind::TCM, ModelKind::QTM};
  std::uint64_t index = 0;
  for (ModelKind m : kAll) {
    for (int i = 0; i < cfg.per_model; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s_%02d", to_string(m), i);
      out.push_back({buf, m, index++});
    }
  }
  return out;
}

ExperimentGroundTruth run_simulate_experiment(const PipelineConfig& cfg,
                                              const ExperimentSpec& spec,
                                              const std::string& exp_dir,
                                              std::vector<std::string>* outputs,
                                              std::vector<FovExperiment>* fovs_out) {
  SimConfig sc = cfg.sim;
  sc.model_kind = spec.model;
  sc.seed = stage_seed(cfg.seed, kStreamSimulate, spec.index);
  sc.check_valid();

  ExperimentGroundTruth gt = simulate_experiment(sc);

  fs::create_directories(exp_dir);
  auto emit = [&](const std::string& rel, const std::string& contents) {
    const std::string path = exp_dir + "/" + rel;
    write_file(path, contents);
    if (outputs) outputs->push_back(path);
  };
  emit("trajectories.csv", to_csv(gt.trajectories));
  emit("truth_params.csv", to_csv(gt.truth_tracks));
  emit("changepoints.csv", changepoints_to_csv(gt.trajectories, gt.changepoints));

  std::vector<FovExperiment> fovs = extract_fovs(gt, sc);
  const std::size_t n_emit = cfg.fovs <= 0
                                 ? fovs.size()
                                 : std::min(fovs.size(), static_cast<std::size_t>(cfg.fovs));
  for (std::size_t f = 0; f < n_emit; ++f) {
    const FovExperiment& fov = fovs[f];
    const std::string fov_dir = exp_dir + "/" + fov_dir_name(fov.fov_id);
    fs::create_directories(fov_dir);
    auto emit_fov = [&](const std::string& rel, const std::string& contents) {
      const std::string path = fov_dir + "/" + rel;
      write_file(path, contents);
      if (outputs) outputs->push_back(path);
    };
    emit_fov("trajectories.csv", to_csv(fov.trajectories));
    emit_fov("truth_params.csv", to_csv(fov.truth_tracks));
    std::string src = "clip_id,source_traj_id\n";
    for (std::size_t i = 0; i < fov.source_traj_ids.size(); ++i) {
      src += std::to_string(fov.trajectories[i].id) + "," +
             std::to_string(fov.source_traj_ids[i]) + "\n";
    }
    emit_fov("source_ids.csv", src);
    const std::vector<FovTensor> tensors = to_fov_tensors(fov.trajectories, fov.fov_id);
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "tensor_%02d.bin", static_cast<int>(t));
      const std::string path = fov_dir + "/" + buf;
      write_fov_tensor(path, tensors[t]);
      if (outputs) outputs->push_back(path);
    }
    if (cfg.with_video) {
      auto written = run_render_fov(cfg, fov.trajectories, fov_dir, fov.fov_id,
                                    spec.index * 64 + static_cast<std::uint64_t>(fov.fov_id));
      if (outputs) outputs->insert(outputs->end(), written.begin(), written.end());
    }
  }
  if (fovs_out) {
    fovs_out->assign(fovs.begin(), fovs.begin() + static_cast<std::ptrdiff_t>(n_emit));
  }
  return gt;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::vector<std::string> run_render_fov(const PipelineConfig& cfg,
                                        const std::vector<Trajectory>& trajectories,
                                        const std::string& fov_dir, int fov_id,
                                        std::uint64_t seed_item) {
  std::vector<std::string> written;
  Rng rng(stage_seed(cfg.seed, kStreamRender, seed_item));
  const FrameStack stack =
      render_frames(trajectories, cfg.sim.n_frames, cfg.sim.fov_size, cfg.render, rng);
  const std::string frames_dir = fov_dir + "/frames";
  write_frame_stack(frames_dir, stack, fov_id, cfg.render);
  written.push_back(frames_dir + "/index.json");
  if (cfg.vips > 0) {
    const std::vector<int> vip_idx = select_vips(trajectories, cfg.vips);
    if (!vip_idx.empty()) {
      const GrayImage img = render_vip_frame(trajectories, vip_idx, cfg.sim.fov_size);
      const std::string vip_path = fov_dir + "/vip.pgm";
      write_pgm(vip_path, img);
      written.push_back(vip_path);
      std::map<int, int> truth;
      for (std::size_t i = 0; i < vip_idx.size(); ++i) {
        truth[static_cast<int>(i) + 1] = trajectories[static_cast<std::size_t>(vip_idx[i])].id;
      }
      const std::string map_path = fov_dir + "/vip_truth.csv";
      write_file(map_path, vip_map_to_csv(truth));
      written.push_back(map_path);
    }
  }
  return written;
}

std::vector<ParamTrack> run_infer(const PipelineConfig& cfg,
                                  const std::vector<Trajectory>& trajectories,
                                  const std::string& predictions_path,
                                  int* low_confidence_count) {
  if (cfg.predictor == "file") {
    if (predictions_path.empty()) {
      throw std::invalid_argument("predictor 'file' needs a predictions path");
    }
    std::vector<ParamTrack> preds = load_predictions(predictions_path);
    reconcile_predictions(preds, trajectories);
    return preds;
  }
  std::vector<ParamTrack> out;
  out.reserve(trajectories.size());
  int low = 0;
  for (const Trajectory& traj : trajectories) {
    EstimateResult r = estimate_params_window(traj, cfg.estimator);
    if (r.low_confidence) ++low;
    out.push_back(std::move(r.track));
  }
  if (low_confidence_count) *low_confidence_count = low;
  return out;
}

std::vector<SegmentedTrajectory> run_segment(const PipelineConfig& cfg,
                                             const std::vector<ParamTrack>& tracks) {
  std::vector<SegmentedTrajectory> out;
  out.reserve(tracks.size());
  for (const ParamTrack& t : tracks) out.push_back(normalize_trajectory(t, cfg.cp));
  return out;
}

SegmentedTrajectory exact_segments(const ParamTrack& track) {
  SegmentedTrajectory st;
  st.traj_id = track.traj_id;
  st.length = track.length();
  std::vector<int> bounds = changepoints_from_track(track);
  bounds.push_back(track.length());
  int start = 0;
  for (int b : bounds) {
    Segment seg;
    seg.start = start;
    seg.end = b;
    seg.params = DiffusionParams(track.alpha_t[static_cast<std::size_t>(start)],
                                 track.k_t[static_cast<std::size_t>(start)]);
    seg.state = track.state_t[static_cast<std::size_t>(start)];
    st.segments.push_back(seg);
    start = b;
  }
  st.check_valid();
  return st;
}

}  // namespace anomdiff::app
