// anomdiff: synthetic anomalous-diffusion experiments and the full
// measurement chain over them (detect, link, infer, segment, evaluate).
//
// Exit codes: 0 success, 1 usage error, 2 empty result, 3 validation or
// input failure.
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using anomdiff::app::CliArgs;

// --config is honored before the regular parse so that explicit flags
// always override file values, whatever their order on the command line.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return "";
}

struct EnumFlags {
  std::string model;
  std::string cp_algo;
  std::string cp_cost;
};

void add_common_flags(CLI::App* sub, CliArgs& args, EnumFlags& enums) {
  auto& cfg = args.cfg;
  sub->add_option("--config", args.config_path,
                  "JSON config file; explicit flags override its values");
  sub->add_option("--seed", cfg.seed, "root seed; every stage derives its stream from it");
  sub->add_option("--jobs", cfg.jobs, "worker threads across experiments/FOVs");

  sub->add_option("--model", enums.model, "phenomenological model")
      ->check(CLI::IsMember({"ssm", "msm", "dim", "tcm", "qtm"}));
  sub->add_option("--per-model", cfg.per_model,
                  "fixture mode: this many experiments per model (0 = single model)");
  sub->add_option("--fovs", cfg.fovs, "FOV directories per experiment; 0 = all");
  sub->add_flag("--with-video,!--no-video", cfg.with_video,
                "render frame stacks; pipeline scores the tracked VIP subset");
  sub->add_option("--vips", cfg.vips, "labeled particles per rendered FOV");
  sub->add_option("--predictor", cfg.predictor, "parameter predictor")
      ->check(CLI::IsMember({"msd", "file"}));
  sub->add_flag("--force-two-states", cfg.force_two_states,
                "always fit two ensemble states");
  sub->add_option("--eps-cp", cfg.eps_cp, "changepoint pairing gate, frames");

  sub->add_option("--field-size", cfg.sim.field_size, "simulation field edge, px");
  sub->add_option("--fov-size", cfg.sim.fov_size, "FOV edge, px");
  sub->add_option("--n-frames", cfg.sim.n_frames, "frames per experiment");
  sub->add_option("--max-particles-per-fov", cfg.sim.max_particles_per_fov);
  sub->add_option("--mean-particles", cfg.sim.mean_particles,
                  "Poisson mean particle count over the field");
  sub->add_option("--sigma-alpha", cfg.sim.sigma_alpha);
  sub->add_option("--sigma-k", cfg.sim.sigma_k);
  sub->add_option("--directed-alpha-threshold", cfg.sim.directed_alpha_threshold);
  sub->add_option("--msm-states", cfg.sim.msm.n_states);
  sub->add_option("--msm-dwell", cfg.sim.msm.mean_dwell);
  sub->add_option("--dim-r-bind", cfg.sim.dim.r_bind);
  sub->add_option("--dim-p-bind", cfg.sim.dim.p_bind);
  sub->add_option("--dim-p-unbind", cfg.sim.dim.p_unbind);
  sub->add_option("--dim-k-scale", cfg.sim.dim.k_scale);
  sub->add_option("--tcm-compartments", cfg.sim.tcm.n_compartments);
  sub->add_option("--tcm-radius", cfg.sim.tcm.radius);
  sub->add_option("--tcm-transmittance", cfg.sim.tcm.transmittance);
  sub->add_option("--tcm-k-scale", cfg.sim.tcm.k_scale);
  sub->add_option("--qtm-traps", cfg.sim.qtm.n_traps);
  sub->add_option("--qtm-radius", cfg.sim.qtm.radius);
  sub->add_option("--qtm-escape", cfg.sim.qtm.p_escape);

  sub->add_option("--psf-sigma", cfg.render.psf_sigma, "PSF sigma, px");
  sub->add_option("--intensity", cfg.render.particle_intensity, "peak counts above background");
  sub->add_option("--background", cfg.render.background, "background counts");
  sub->add_option("--noise-sigma", cfg.render.noise_sigma, "read noise sigma, counts");

  sub->add_option("--diameter", cfg.detect.diameter, "spot diameter, odd px");
  sub->add_option("--minmass", cfg.detect.minmass, "minimum integrated brightness");
  sub->add_option("--separation", cfg.detect.separation, "minimum spot separation, px");
  sub->add_option("--border-pad", cfg.detect.border_pad, "edge exclusion, px (-1 = diameter)");

  sub->add_option("--search-range", cfg.link.search_range, "max displacement per frame, px");
  sub->add_option("--memory", cfg.link.memory, "frames a particle may vanish");

  sub->add_option("--est-window", cfg.estimator.window, "estimator window, odd frames");
  sub->add_option("--min-lags", cfg.estimator.min_lags, "TA-MSD lags used in the fit");
  sub->add_option("--k-immobile", cfg.estimator.k_immobile);
  sub->add_option("--alpha-directed", cfg.estimator.alpha_directed);
  sub->add_option("--confinement-radius", cfg.estimator.confinement_radius);

  sub->add_option("--cp-algo", enums.cp_algo, "changepoint algorithm")
      ->check(CLI::IsMember({"pelt", "binseg", "bottomup", "window"}));
  sub->add_option("--cp-cost", enums.cp_cost, "segment cost")
      ->check(CLI::IsMember({"l1", "l2", "linear"}));
  sub->add_option("--penalty", cfg.cp.penalty, "changepoint penalty; < 0 = automatic");
  sub->add_option("--window", cfg.cp.window_width, "sliding window width, frames");
  sub->add_option("--min-segment", cfg.cp.min_segment, "minimum segment length, frames");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anomalous-diffusion simulation and characterization toolchain"};
  app.require_subcommand(1);

  CliArgs args;
  EnumFlags enums;

  const std::string config_path = find_config_arg(argc, argv);
  if (!config_path.empty()) {
    try {
      anomdiff::app::config_from_json_file(config_path, args.cfg);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return anomdiff::app::kInvalid;
    }
  }

  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate ground-truth experiments (trajectories, truth, tensors)");
  add_common_flags(simulate, args, enums);
  simulate->add_option("--out", args.out_dir, "output directory")->required();

  CLI::App* render =
      app.add_subcommand("render", "render frame stacks for a simulated experiment directory");
  add_common_flags(render, args, enums);
  render->add_option("--in", args.in_dir, "experiment directory holding fov_* subdirectories")
      ->required();

  CLI::App* track =
      app.add_subcommand("track", "detect spots in a frame stack and link trajectories");
  add_common_flags(track, args, enums);
  track->add_option("--frames", args.frames_dir, "frame-stack directory (index.json + PGMs)")
      ->required();
  track->add_option("--out", args.out_dir, "output directory")->required();
  track->add_option("--vip", args.vip_path, "VIP label PGM to map onto trajectories");

  CLI::App* infer =
      app.add_subcommand("infer", "per-frame (alpha, K, state) for each trajectory");
  add_common_flags(infer, args, enums);
  infer->add_option("--traj", args.traj_path, "trajectory CSV")->required();
  infer->add_option("--out", args.out_dir, "output directory")->required();
  infer->add_option("--predictions", args.predictions_path,
                    "ParamTrack CSV for --predictor file");

  CLI::App* segment =
      app.add_subcommand("segment", "piecewise-constant segments and ensemble summary");
  add_common_flags(segment, args, enums);
  segment->add_option("--params", args.params_path, "ParamTrack CSV")->required();
  segment->add_option("--out", args.out_dir, "output directory")->required();

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "challenge metrics against ground truth");
  add_common_flags(evaluate, args, enums);
  evaluate->add_option("--pred", args.pred_path, "predicted segments.csv or experiment directory")
      ->required();
  evaluate->add_option("--truth", args.truth_path, "truth_params.csv or experiment directory")
      ->required();
  evaluate->add_option("--out", args.out_dir, "output directory")->required();
  evaluate->add_option("--pred-format", args.pred_format, "predictions schema")
      ->check(CLI::IsMember({"segments", "params"}));

  CLI::App* pipeline =
      app.add_subcommand("pipeline", "simulate -> infer -> segment -> evaluate in one run");
  add_common_flags(pipeline, args, enums);
  pipeline->add_option("--out", args.out_dir, "output directory")->required();
  pipeline->add_option("--predictions", args.predictions_path,
                       "ParamTrack CSV for --predictor file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? anomdiff::app::kOk : anomdiff::app::kUsage;
  }

  try {
    if (!enums.model.empty()) {
      args.cfg.sim.model_kind = anomdiff::model_kind_from_string(enums.model);
    }
    if (!enums.cp_algo.empty()) {
      args.cfg.cp.algorithm = anomdiff::cp_algorithm_from_string(enums.cp_algo);
    }
    if (!enums.cp_cost.empty()) {
      args.cfg.cp.cost = anomdiff::cp_cost_from_string(enums.cp_cost);
    }
    if (app.got_subcommand(simulate)) return anomdiff::app::cmd_simulate(args);
    if (app.got_subcommand(render)) return anomdiff::app::cmd_render(args);
    if (app.got_subcommand(track)) return anomdiff::app::cmd_track(args);
    if (app.got_subcommand(infer)) return anomdiff::app::cmd_infer(args);
    if (app.got_subcommand(segment)) return anomdiff::app::cmd_segment(args);
    if (app.got_subcommand(evaluate)) return anomdiff::app::cmd_evaluate(args);
    if (app.got_subcommand(pipeline)) return anomdiff::app::cmd_pipeline(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return anomdiff::app::kInvalid;
  }
  return anomdiff::app::kUsage;
}
