#pragma once

#include <utility>
#include <vector>

#include "anomdiff/types.hpp"

namespace anomdiff {

// min(|t_gt - t_p|, eps). eps must be positive.
double gated_distance(double t_gt, double t_p, double eps);

struct CpMatchResult {
  std::vector<std::pair<int, int>> pairs;  // matched (gt index, pred index)
  int tp = 0;  // pairs with gated distance strictly below eps_cp
  int fp = 0;
  int fn = 0;
  double eps_cp = 10.0;
};

// Hungarian assignment on the gated-distance matrix, square-padded with eps
// so unmatched change points cost the gate value.
CpMatchResult pair_changepoints(const std::vector<int>& gt, const std::vector<int>& pred,
                                double eps = 10.0);

// TP / (TP + FP + FN); 1 when both lists were empty.
double jsc(const CpMatchResult& m);

// RMSE of raw differences over TP pairs; 0 without TP pairs.
double rmse_cp(const CpMatchResult& m, const std::vector<int>& gt, const std::vector<int>& pred);

// Frame-wise mean absolute error.
double mae_alpha(const std::vector<double>& gt, const std::vector<double>& pred);

// Mean of (ln(gt+1) - ln(pred+1))^2; negatives clamp to 0, counted into
// *clamped when given.
double msle_k(const std::vector<double>& gt, const std::vector<double>& pred,
              int* clamped = nullptr);

// Micro-averaged F1 over frames (class counts summed before the ratio).
double f1_state(const std::vector<DiffusionState>& gt, const std::vector<DiffusionState>& pred);

// Exact integral of |CDF_P - CDF_Q| between empirical CDFs. When
// restrict_to_q_support is set the integration interval is [min Q, max Q]
// (asymmetric); otherwise the full real line (symmetric).
double wasserstein1(std::vector<double> p, std::vector<double> q,
                    bool restrict_to_q_support = true);

struct EvaluationReport {
  double rmse_cp = 0.0;
  double jsc_cp = 0.0;
  double mae_alpha = 0.0;
  double msle_k = 0.0;
  double f1_state = 0.0;
  double w1_alpha = 0.0;  // supp(Q)-restricted, the headline convention
  double w1_k = 0.0;
  double w1_alpha_unrestricted = 0.0;
  double w1_k_unrestricted = 0.0;
  int n_trajs = 0;
  int msle_clamped = 0;  // negative K values clamped during MSLE
};

// One experiment: CP counts pooled before JSC/RMSE, alpha/K/state errors
// frame-weighted across trajectories, W1 on pooled per-segment parameter
// samples (predictions vs truth segments). Ids must match one-to-one.
EvaluationReport evaluate_experiment(const std::vector<SegmentedTrajectory>& predictions,
                                     const std::vector<ParamTrack>& truth_tracks,
                                     double eps_cp = 10.0);

// Multi-experiment summary: single-trajectory metrics weighted by
// trajectory count, ensemble (W1) metrics averaged arithmetically.
EvaluationReport combine_reports(const std::vector<EvaluationReport>& reports);

}  // namespace anomdiff
