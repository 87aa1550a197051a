#pragma once

#include <limits>
#include <map>
#include <vector>

#include "anomdiff/detect.hpp"
#include "anomdiff/render.hpp"
#include "anomdiff/types.hpp"

namespace anomdiff {

struct LinkConfig {
  double search_range = 5.0;  // px
  int memory = 0;             // frames a particle may vanish and still relink

  // Throws std::invalid_argument: search_range <= 0 or memory < 0.
  void check_valid() const;
};

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

struct Assignment {
  std::vector<int> row_to_col;  // -1 = unassigned
  double total_cost = 0.0;      // finite assignments only
};

// Minimum-cost maximal pairing: among pairings with the largest number of
// allowed (finite-cost) pairs, the one of minimum total cost. Entries of
// kForbidden mark disallowed pairs. With require_complete, every row must
// receive an allowed column, otherwise std::runtime_error.
Assignment solve_assignment(const std::vector<std::vector<double>>& cost,
                            bool require_complete = false);

// Frame-pairwise linking, cost = squared displacement, pairs beyond
// search_range forbidden. Unmatched detections open new trajectories (ids in
// order of first appearance); tracks unseen for more than `memory` frames
// terminate. Relinking across a gap fills the missing frames by linear
// interpolation so trajectories stay frame-consecutive.
std::vector<Trajectory> link(const std::vector<Detection>& detections, const LinkConfig& cfg);

struct VipLabelFrame {
  // label -> pixels (y, x); labels positive, regions disjoint.
  std::map<int, std::vector<std::pair<int, int>>> regions;

  static VipLabelFrame from_image(const GrayImage& image);
  Point centroid(int label) const;
};

struct VipMatch {
  std::map<int, int> label_to_traj;  // trajectory id
  std::vector<int> unmatched_labels;
};

// Label centroids matched to trajectories present at frame 0 by linear sum
// assignment on Euclidean distance. Labels beyond the trajectory supply are
// reported unmatched.
VipMatch match_vips(const VipLabelFrame& vip, const std::vector<Trajectory>& trajectories);

}  // namespace anomdiff
