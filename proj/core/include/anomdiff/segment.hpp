#pragma once

#include <string>
#include <vector>

#include "anomdiff/types.hpp"

namespace anomdiff {

enum class CpAlgorithm { Pelt, BinSeg, BottomUp, Window };
enum class CpCost { L1, L2, Linear };

std::string to_string(CpAlgorithm a);
std::string to_string(CpCost c);
CpAlgorithm cp_algorithm_from_string(const std::string& name);
CpCost cp_cost_from_string(const std::string& name);

struct CpConfig {
  CpAlgorithm algorithm = CpAlgorithm::Window;
  CpCost cost = CpCost::L2;
  double penalty = -1.0;  // < 0 selects 3 * sigma^2 * ln(n), sigma from diff MAD
  int window_width = 20;  // Window algorithm only
  int min_segment = 3;    // frames

  // Throws std::invalid_argument: min_segment < 1,
  // window_width < 2*min_segment, penalty = NaN.
  void check_valid() const;
};

// Cost of series[a..b): L2 = sum of squared deviations from the mean,
// L1 = sum of absolute deviations from the median, Linear = residual sum of
// squares of the least-squares line.
double segment_cost(const std::vector<double>& series, int a, int b, CpCost cost);

// 3 * sigma^2 * ln(n); sigma estimated from the median absolute deviation of
// first differences (MAD / (0.6745 * sqrt(2))), variance floored at 1e-12.
double auto_penalty(const std::vector<double>& series);

// Ascending change points strictly inside (0, n), each segment at least
// min_segment frames. Pelt is exact; BinSeg and BottomUp greedy; Window
// thresholds the two-sided discrepancy. Series shorter than 2*min_segment
// yield no change points.
std::vector<int> detect_changepoints(const std::vector<double>& series, const CpConfig& cfg);

// Runs shorter than 3 frames are absorbed into the longer neighbor (tie goes
// to the earlier run), repeated until every run is >= 3 frames or one run
// remains. Idempotent.
std::vector<DiffusionState> smooth_states(const std::vector<DiffusionState>& states);

// Change points from the standardized alpha and K channels (union,
// deduplicated so segments keep min_segment frames), then per-segment median
// alpha, median K and modal smoothed state.
SegmentedTrajectory normalize_trajectory(const ParamTrack& track, const CpConfig& cfg);

struct EnsembleCluster {
  double mean_alpha = 0.0;
  double std_alpha = 0.0;
  double mean_k = 0.0;
  double std_k = 0.0;
  double weight = 0.0;  // fraction of segments
};

struct EnsembleSummary {
  int n_states = 1;
  std::vector<EnsembleCluster> clusters;
  bool collapsed = false;  // two states requested but < 2 distinct points
};

// Single-state summary unless some trajectory has more than one segment (or
// force_two_states): then two-cluster K-means on standardized (alpha, K)
// segment points, deterministic seeding, clusters ordered by (mean K,
// mean alpha). Throws std::invalid_argument when no segments exist.
EnsembleSummary aggregate_ensemble(const std::vector<SegmentedTrajectory>& trajectories,
                                   bool force_two_states = false);

}  // namespace anomdiff
