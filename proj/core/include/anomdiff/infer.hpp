#pragma once

#include <string>
#include <vector>

#include "anomdiff/types.hpp"

namespace anomdiff {

struct EstimatorConfig {
  int window = 31;                 // frames, odd
  int min_lags = 4;                // TA-MSD lags 1..min_lags
  double k_immobile = 1e-3;        // K below this reads as Immobile
  double alpha_directed = 1.9;     // alpha above this reads as Directed
  double confinement_radius = 2.0; // px, windowed positional scatter bound

  // Throws std::invalid_argument: window < 2*min_lags + 1 or even window,
  // min_lags < 1, nonpositive thresholds.
  void check_valid() const;
};

struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
};

// Element t is (x(t+1) - x(t), y(t+1) - y(t)) * scale; length n-1.
std::vector<Displacement> to_displacements(const Trajectory& traj, double scale = 1.0);

struct EstimateResult {
  ParamTrack track;
  bool low_confidence = false;  // set by the short-trajectory fallback
};

// Frame-by-frame MSD-window estimate: time-averaged MSD over lags
// 1..min_lags inside the centered (truncated near ends) window, log-log
// least squares for (alpha, K), nearest interior estimate copied onto the
// first/last min_lags frames, states from classify_state. Trajectories
// shorter than min_lags + 2 fall back to alpha = 1, K = mean squared
// step / 2, flagged low-confidence.
EstimateResult estimate_params_window(const Trajectory& traj, const EstimatorConfig& cfg);

// Per frame: Immobile if K < k_immobile; else Directed if
// alpha > alpha_directed; else Confined if the windowed positional RMS
// scatter is below confinement_radius; else Free.
std::vector<DiffusionState> classify_state(const std::vector<double>& alpha_t,
                                           const std::vector<double>& k_t,
                                           const std::vector<Point>& positions,
                                           const EstimatorConfig& cfg);

// ParamTrack CSV parsed and validated (line-numbered errors). The U-Net
// output slot: predictions computed elsewhere enter here.
std::vector<ParamTrack> load_predictions(const std::string& path);

// Throws std::runtime_error when predictions and trajectories disagree on
// ids or lengths (each trajectory needs exactly one matching track).
void reconcile_predictions(const std::vector<ParamTrack>& predictions,
                           const std::vector<Trajectory>& trajectories);

}  // namespace anomdiff
