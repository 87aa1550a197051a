#include "anomdiff/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anomdiff {

namespace {

// Hungarian algorithm with potentials, O(n^3), square matrix, 1-based
// internals. Returns column assigned to each row.
std::vector<int> hungarian_square(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  const double inf = std::numeric_limits<double>::max();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = a[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[static_cast<std::size_t>(j)] > 0) {
      row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    }
  }
  return row_to_col;
}

}  // namespace

void LinkConfig::check_valid() const {
  if (!(search_range > 0.0)) throw std::invalid_argument("LinkConfig: search_range must be positive");
  if (memory < 0) throw std::invalid_argument("LinkConfig: memory must be >= 0");
}

Assignment solve_assignment(const std::vector<std::vector<double>>& cost, bool require_complete) {
  const int n = static_cast<int>(cost.size());
  const int m = n > 0 ? static_cast<int>(cost[0].size()) : 0;
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != m) {
      throw std::invalid_argument("solve_assignment: ragged cost matrix");
    }
    for (double c : row) {
      if (std::isnan(c) || (c != kForbidden && !std::isfinite(c))) {
        throw std::invalid_argument("solve_assignment: costs must be finite or kForbidden");
      }
    }
  }
  Assignment result;
  result.row_to_col.assign(static_cast<std::size_t>(n), -1);
  if (n == 0 || m == 0) {
    if (require_complete && n > 0) {
      throw std::runtime_error("solve_assignment: no columns for a complete matching");
    }
    return result;
  }

  // Square padding; forbidden and dummy cells cost BIG so the solver first
  // maximizes the number of allowed pairs, then minimizes their cost.
  double max_cost = 0.0;
  for (const auto& row : cost) {
    for (double c : row) {
      if (c != kForbidden) max_cost = std::max(max_cost, std::abs(c));
    }
  }
  const int size = std::max(n, m);
  const double big = (max_cost + 1.0) * (static_cast<double>(size) + 1.0);
  std::vector<std::vector<double>> padded(static_cast<std::size_t>(size),
                                          std::vector<double>(static_cast<std::size_t>(size), big));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double c = cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (c != kForbidden) padded[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
    }
  }

  const std::vector<int> assignment = hungarian_square(padded);
  for (int i = 0; i < n; ++i) {
    const int j = assignment[static_cast<std::size_t>(i)];
    if (j < 0 || j >= m) continue;
    const double c = cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (c == kForbidden) continue;
    result.row_to_col[static_cast<std::size_t>(i)] = j;
    result.total_cost += c;
  }
  if (require_complete) {
    for (int i = 0; i < n; ++i) {
      if (result.row_to_col[static_cast<std::size_t>(i)] < 0) {
        throw std::runtime_error("solve_assignment: row " + std::to_string(i) +
                                 " has no allowed column in a complete matching");
      }
    }
  }
  return result;
}

std::vector<Trajectory> link(const std::vector<Detection>& detections, const LinkConfig& cfg) {
  cfg.check_valid();
  std::vector<Trajectory> trajectories;
  if (detections.empty()) return trajectories;
  for (std::size_t i = 1; i < detections.size(); ++i) {
    if (detections[i].frame < detections[i - 1].frame) {
      throw std::invalid_argument("link: detections must be sorted by frame");
    }
  }

  struct Active {
    int traj;
    double x, y;
    int last_frame;
  };
  std::vector<Active> active;
  const int last_frame = detections.back().frame;
  const double range2 = cfg.search_range * cfg.search_range;

  std::size_t cursor = 0;
  for (int frame = detections.front().frame; frame <= last_frame; ++frame) {
    std::vector<const Detection*> dets;
    while (cursor < detections.size() && detections[cursor].frame == frame) {
      dets.push_back(&detections[cursor]);
      ++cursor;
    }

    std::vector<std::vector<double>> cost(active.size(),
                                          std::vector<double>(dets.size(), kForbidden));
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = 0; j < dets.size(); ++j) {
        const double dx = dets[j]->x - active[i].x;
        const double dy = dets[j]->y - active[i].y;
        const double d2 = dx * dx + dy * dy;
        if (d2 <= range2) cost[i][j] = d2;
      }
    }
    const Assignment match = dets.empty() || active.empty()
                                 ? Assignment{std::vector<int>(active.size(), -1), 0.0}
                                 : solve_assignment(cost);

    std::vector<bool> det_taken(dets.size(), false);
    std::vector<Active> next_active;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const int j = match.row_to_col[i];
      if (j >= 0) {
        det_taken[static_cast<std::size_t>(j)] = true;
        Trajectory& t = trajectories[static_cast<std::size_t>(active[i].traj)];
        const int gap = frame - active[i].last_frame;
        for (int g = 1; g < gap; ++g) {
          const double f = static_cast<double>(g) / gap;
          t.points.push_back({active[i].x + f * (dets[static_cast<std::size_t>(j)]->x - active[i].x),
                              active[i].y + f * (dets[static_cast<std::size_t>(j)]->y - active[i].y)});
        }
        t.points.push_back({dets[static_cast<std::size_t>(j)]->x, dets[static_cast<std::size_t>(j)]->y});
        next_active.push_back({active[i].traj, dets[static_cast<std::size_t>(j)]->x,
                               dets[static_cast<std::size_t>(j)]->y, frame});
      } else if (frame - active[i].last_frame <= cfg.memory) {
        next_active.push_back(active[i]);
      }
    }
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (det_taken[j]) continue;
      const int id = static_cast<int>(trajectories.size());
      Trajectory t;
      t.id = id;
      t.start_frame = frame;
      t.points.push_back({dets[j]->x, dets[j]->y});
      trajectories.push_back(std::move(t));
      next_active.push_back({id, dets[j]->x, dets[j]->y, frame});
    }
    active = std::move(next_active);
  }
  return trajectories;
}

VipLabelFrame VipLabelFrame::from_image(const GrayImage& image) {
  VipLabelFrame out;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const int label = image.at(y, x);
      if (label > 0) out.regions[label].emplace_back(y, x);
    }
  }
  return out;
}

Point VipLabelFrame::centroid(int label) const {
  const auto it = regions.find(label);
  if (it == regions.end() || it->second.empty()) {
    throw std::invalid_argument("VipLabelFrame: unknown label " + std::to_string(label));
  }
  double sx = 0.0, sy = 0.0;
  for (const auto& [y, x] : it->second) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(it->second.size());
  return {sx / n, sy / n};
}

VipMatch match_vips(const VipLabelFrame& vip, const std::vector<Trajectory>& trajectories) {
  std::vector<int> labels;
  for (const auto& [label, pixels] : vip.regions) {
    if (label <= 0) throw std::invalid_argument("match_vips: labels must be positive");
    labels.push_back(label);
  }
  std::vector<int> candidates;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].start_frame == 0 && !trajectories[i].points.empty()) {
      candidates.push_back(static_cast<int>(i));
    }
  }

  VipMatch out;
  if (labels.empty()) return out;
  std::vector<std::vector<double>> cost(labels.size(), std::vector<double>(candidates.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Point c = vip.centroid(labels[i]);
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const Point& p = trajectories[static_cast<std::size_t>(candidates[j])].points[0];
      cost[i][j] = std::hypot(p.x - c.x, p.y - c.y);
    }
  }
  const Assignment match = candidates.empty()
                               ? Assignment{std::vector<int>(labels.size(), -1), 0.0}
                               : solve_assignment(cost);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int j = match.row_to_col[i];
    if (j < 0) {
      out.unmatched_labels.push_back(labels[i]);
    } else {
      out.label_to_traj[labels[i]] =
          trajectories[static_cast<std::size_t>(candidates[static_cast<std::size_t>(j)])].id;
    }
  }
  return out;
}

}  // namespace anomdiff
