// Shared plumbing for the anomdiff command-line tool: the merged run
// configuration, its JSON round-trip, seed derivation, and the run.json
// provenance sidecar every command writes next to its outputs.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "anomdiff/detect.hpp"
#include "anomdiff/infer.hpp"
#include "anomdiff/link.hpp"
#include "anomdiff/metrics.hpp"
#include "anomdiff/render.hpp"
#include "anomdiff/segment.hpp"
#include "anomdiff/serialize.hpp"
#include "anomdiff/simulate.hpp"
#include "anomdiff/types.hpp"

namespace anomdiff::app {

// Process exit codes. Usage errors come from the argument parser; anything
// a command rejects after parsing (bad config, malformed input file) is a
// validation failure.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kEmpty = 2;
inline constexpr int kInvalid = 3;

// Every stage's knobs in one record. A run writes the fully resolved copy
// back into run.json, so any output can be reproduced from that file alone.
struct PipelineConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  int per_model = 0;   // > 0: fixture mode, this many experiments per model
  int fovs = 1;        // FOV directories to emit per experiment; <= 0 = all
  bool with_video = false;
  int vips = 10;       // labeled particles per rendered FOV; 0 disables
  std::string predictor = "msd";  // msd | file
  bool force_two_states = false;
  double eps_cp = 10.0;

  SimConfig sim;
  RenderConfig render;
  DetectConfig detect;
  LinkConfig link;
  EstimatorConfig estimator;
  CpConfig cp;

  void check_valid() const;
};

// JSON echo of the resolved configuration (stable key order).
std::string config_to_json(const PipelineConfig& cfg);

// Merge a config file into cfg; keys absent from the file keep their
// current values. Throws std::runtime_error with path context on I/O or
// parse failure, std::invalid_argument on bad values.
void config_from_json_file(const std::string& path, PipelineConfig& cfg);

// Stream ids for per-stage seed derivation from the root seed.
inline constexpr std::uint64_t kStreamSimulate = 1;
inline constexpr std::uint64_t kStreamRender = 2;

std::uint64_t stage_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t item);

// Provenance sidecar: command name, resolved config, consumed inputs and
// produced outputs with checksums. Deterministic bytes for a given run.
void write_run_json(const std::string& path, const std::string& command,
                    const PipelineConfig& cfg, const InputChecksums& inputs,
                    const std::vector<std::string>& output_paths);

// Checksums for a list of files, named by the given paths.
InputChecksums checksum_files(const std::vector<std::string>& paths);

// The experiments a simulate or pipeline run produces: fixture mode loops
// every model kind per_model times, otherwise the single configured model.
struct ExperimentSpec {
  std::string name;
  ModelKind model = ModelKind::SSM;
  std::uint64_t index = 0;  // position in the run, seeds derive from it
};
std::vector<ExperimentSpec> experiment_list(const PipelineConfig& cfg);

// Simulate one experiment and write its files under exp_dir:
// trajectories.csv, truth_params.csv, changepoints.csv, and per-FOV
// subdirectories with tensors (frames and VIP labels when with_video).
// Returns the ground truth for in-process chaining; fovs_out receives the
// emitted FOV cuts when non-null.
ExperimentGroundTruth run_simulate_experiment(const PipelineConfig& cfg,
                                              const ExperimentSpec& spec,
                                              const std::string& exp_dir,
                                              std::vector<std::string>* outputs,
                                              std::vector<FovExperiment>* fovs_out = nullptr);

// Run fn(0..n-1) on up to `jobs` threads; the first exception wins and is
// rethrown after all threads join. Work units must touch disjoint outputs.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

// Render frames + VIP labels for one FOV directory that already holds
// trajectories.csv. Returns the written paths.
std::vector<std::string> run_render_fov(const PipelineConfig& cfg,
                                        const std::vector<Trajectory>& trajectories,
                                        const std::string& fov_dir, int fov_id,
                                        std::uint64_t seed_item);

// Per-trajectory inference with the configured predictor. For "file" the
// predictions path is loaded and reconciled against the trajectories.
std::vector<ParamTrack> run_infer(const PipelineConfig& cfg,
                                  const std::vector<Trajectory>& trajectories,
                                  const std::string& predictions_path,
                                  int* low_confidence_count);

std::vector<SegmentedTrajectory> run_segment(const PipelineConfig& cfg,
                                             const std::vector<ParamTrack>& tracks);

// Exact segmentation of a truth track: boundaries at its changepoints,
// per-segment constant parameters taken verbatim.
SegmentedTrajectory exact_segments(const ParamTrack& track);

// Canonical FOV subdirectory name, "fov_%02d".
std::string fov_dir_name(int fov_id);

}  // namespace anomdiff::app
