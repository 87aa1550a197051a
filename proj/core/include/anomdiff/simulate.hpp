#pragma once

#include <vector>

#include "anomdiff/fbm.hpp"
#include "anomdiff/rng.hpp"
#include "anomdiff/types.hpp"

namespace anomdiff {

// Per-model knobs. Only the block matching SimConfig::model_kind is read.
struct MsmParams {
  int n_states = 2;
  double mean_dwell = 50.0;  // frames; per-frame leave probability = 1/mean_dwell
};

struct DimParams {
  double r_bind = 1.0;    // px
  double p_bind = 0.5;    // per contact
  double p_unbind = 0.05; // per frame
  double k_scale = 0.5;   // dimer K relative to the slower member
};

struct TcmParams {
  int n_compartments = 30;
  double radius = 5.0;         // px
  double transmittance = 0.1;  // outward boundary crossing probability
  double k_scale = 0.3;        // K multiplier while confined
};

struct QtmParams {
  int n_traps = 100;
  double radius = 0.5;    // px
  double p_escape = 0.02; // per frame, rolled on the entry frame too
};

struct SimConfig {
  int field_size = 512;
  int fov_size = 128;
  int n_frames = 208;
  int max_particles_per_fov = 64;
  ModelKind model_kind = ModelKind::SSM;
  double mean_particles = 300.0;  // Poisson mean over the whole field
  double sigma_alpha = 0.3;
  double sigma_k = 0.3;
  double directed_alpha_threshold = 1.9;
  MsmParams msm;
  DimParams dim;
  TcmParams tcm;
  QtmParams qtm;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument: fov_size > field_size, n_frames < 2,
  // mean_particles <= 0 or > 1e4, nonpositive model radii/dwell.
  void check_valid() const;
};

// alpha ~ Normal(1, sigma_alpha) truncated to (0, 2]; K ~ Normal(1, sigma_k)
// truncated to > 0, except SSM where K ~ Uniform(1e-4, 4).
DiffusionParams sample_parameters(ModelKind kind, Rng& rng,
                                  double sigma_alpha = 0.3, double sigma_k = 0.3);

// Full-field experiment with per-frame truth. Trajectories span all frames
// (field boundary reflects); truth change points are derived from the
// per-frame (alpha, K, state) triples.
ExperimentGroundTruth simulate_experiment(const SimConfig& cfg);

// One FOV cut from the field: trajectories re-expressed relative to the FOV
// origin, clipped to frames inside it. source_traj_ids[i] is the field
// trajectory the i-th clip came from (re-entries produce separate clips).
struct FovExperiment {
  int fov_id = 0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<Trajectory> trajectories;
  std::vector<ParamTrack> truth_tracks;
  std::vector<int> source_traj_ids;
};

// Tiles the field into (field_size / fov_size)^2 FOVs, row-major origins.
std::vector<FovExperiment> extract_fovs(const ExperimentGroundTruth& experiment,
                                        const SimConfig& cfg);

// Packs up to 64 trajectories into one 64 x 208 x 2 tensor, row r holding
// trajectory r at its start-frame offset. Throws on overflow; use
// to_fov_tensors to split instead.
FovTensor to_fov_tensor(const std::vector<Trajectory>& trajectories, int fov_id = -1);
std::vector<FovTensor> to_fov_tensors(const std::vector<Trajectory>& trajectories, int fov_id = -1);

}  // namespace anomdiff
