#include "anomdiff/infer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "anomdiff/csv.hpp"

namespace anomdiff {

namespace {

struct WindowBounds {
  int lo, hi;  // inclusive frame range
};

WindowBounds centered_window(int t, int n, int window, int min_points) {
  const int hw = window / 2;
  int lo = std::max(0, t - hw);
  int hi = std::min(n - 1, t + hw);
  // Truncation never shrinks the window below min_points frames.
  while (hi - lo + 1 < min_points) {
    if (lo > 0) {
      --lo;
    } else if (hi < n - 1) {
      ++hi;
    } else {
      break;
    }
  }
  return {lo, hi};
}

// Per-axis time-averaged MSD at one lag over positions[lo..hi].
double ta_msd(const std::vector<Point>& pts, int lo, int hi, int lag) {
  double acc = 0.0;
  int count = 0;
  for (int t = lo; t + lag <= hi; ++t) {
    const double dx = pts[static_cast<std::size_t>(t + lag)].x - pts[static_cast<std::size_t>(t)].x;
    const double dy = pts[static_cast<std::size_t>(t + lag)].y - pts[static_cast<std::size_t>(t)].y;
    acc += (dx * dx + dy * dy) / 2.0;
    ++count;
  }
  return count > 0 ? acc / count : 0.0;
}

DiffusionParams fit_loglog(const std::vector<Point>& pts, int lo, int hi, int min_lags) {
  std::vector<double> xs, ys;
  for (int lag = 1; lag <= min_lags && lag <= hi - lo; ++lag) {
    const double m = ta_msd(pts, lo, hi, lag);
    if (m > 0.0) {
      xs.push_back(std::log(static_cast<double>(lag)));
      ys.push_back(std::log(m));
    }
  }
  if (xs.empty()) return DiffusionParams(1.0, 0.0);
  if (xs.size() == 1) return DiffusionParams(1.0, std::exp(ys[0] - xs[0]));

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return DiffusionParams(1.0, std::exp(sy / n));
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return DiffusionParams(std::clamp(slope, DiffusionParams::kMinAlpha, DiffusionParams::kMaxAlpha),
                         std::exp(intercept));
}

double window_scatter(const std::vector<Point>& pts, int lo, int hi) {
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(hi - lo + 1);
  for (int t = lo; t <= hi; ++t) {
    mx += pts[static_cast<std::size_t>(t)].x;
    my += pts[static_cast<std::size_t>(t)].y;
  }
  mx /= n;
  my /= n;
  double acc = 0.0;
  for (int t = lo; t <= hi; ++t) {
    const double dx = pts[static_cast<std::size_t>(t)].x - mx;
    const double dy = pts[static_cast<std::size_t>(t)].y - my;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / n);
}

}  // namespace

void EstimatorConfig::check_valid() const {
  if (min_lags < 1) throw std::invalid_argument("EstimatorConfig: min_lags must be >= 1");
  if (window < 2 * min_lags + 1 || window % 2 == 0) {
    throw std::invalid_argument("EstimatorConfig: window must be odd and >= 2*min_lags + 1");
  }
  if (k_immobile < 0.0 || alpha_directed <= 0.0 || confinement_radius <= 0.0) {
    throw std::invalid_argument("EstimatorConfig: thresholds out of range");
  }
}

std::vector<Displacement> to_displacements(const Trajectory& traj, double scale) {
  std::vector<Displacement> out;
  if (traj.length() < 2) return out;
  out.reserve(static_cast<std::size_t>(traj.length() - 1));
  for (int t = 1; t < traj.length(); ++t) {
    const Point& a = traj.points[static_cast<std::size_t>(t - 1)];
    const Point& b = traj.points[static_cast<std::size_t>(t)];
    out.push_back({(b.x - a.x) * scale, (b.y - a.y) * scale});
  }
  return out;
}

EstimateResult estimate_params_window(const Trajectory& traj, const EstimatorConfig& cfg) {
  cfg.check_valid();
  traj.check_valid();
  const int n = traj.length();

  EstimateResult result;
  result.track.traj_id = traj.id;
  auto& track = result.track;
  track.alpha_t.resize(static_cast<std::size_t>(n));
  track.k_t.resize(static_cast<std::size_t>(n));

  if (n < cfg.min_lags + 2) {
    result.low_confidence = true;
    double msq = 0.0;
    for (int t = 1; t < n; ++t) {
      const double dx = traj.points[static_cast<std::size_t>(t)].x - traj.points[static_cast<std::size_t>(t - 1)].x;
      const double dy = traj.points[static_cast<std::size_t>(t)].y - traj.points[static_cast<std::size_t>(t - 1)].y;
      msq += dx * dx + dy * dy;
    }
    const double k = n > 1 ? msq / (2.0 * (n - 1)) : 0.0;
    std::fill(track.alpha_t.begin(), track.alpha_t.end(), 1.0);
    std::fill(track.k_t.begin(), track.k_t.end(), k);
    track.state_t = classify_state(track.alpha_t, track.k_t, traj.points, cfg);
    return result;
  }

  const int min_points = cfg.min_lags + 1;
  for (int t = 0; t < n; ++t) {
    const WindowBounds w = centered_window(t, n, cfg.window, min_points);
    const DiffusionParams p = fit_loglog(traj.points, w.lo, w.hi, cfg.min_lags);
    track.alpha_t[static_cast<std::size_t>(t)] = p.alpha;
    track.k_t[static_cast<std::size_t>(t)] = p.k;
  }

  // End frames fit on asymmetric windows; adopt the nearest interior value.
  if (n > 2 * cfg.min_lags) {
    for (int t = 0; t < cfg.min_lags; ++t) {
      track.alpha_t[static_cast<std::size_t>(t)] = track.alpha_t[static_cast<std::size_t>(cfg.min_lags)];
      track.k_t[static_cast<std::size_t>(t)] = track.k_t[static_cast<std::size_t>(cfg.min_lags)];
      const int u = n - 1 - t;
      track.alpha_t[static_cast<std::size_t>(u)] = track.alpha_t[static_cast<std::size_t>(n - 1 - cfg.min_lags)];
      track.k_t[static_cast<std::size_t>(u)] = track.k_t[static_cast<std::size_t>(n - 1 - cfg.min_lags)];
    }
  }

  track.state_t = classify_state(track.alpha_t, track.k_t, traj.points, cfg);
  return result;
}

std::vector<DiffusionState> classify_state(const std::vector<double>& alpha_t,
                                           const std::vector<double>& k_t,
                                           const std::vector<Point>& positions,
                                           const EstimatorConfig& cfg) {
  cfg.check_valid();
  const int n = static_cast<int>(alpha_t.size());
  if (static_cast<int>(k_t.size()) != n || static_cast<int>(positions.size()) != n) {
    throw std::invalid_argument("classify_state: sequence lengths disagree");
  }
  std::vector<DiffusionState> out(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    const std::size_t i = static_cast<std::size_t>(t);
    if (k_t[i] < cfg.k_immobile) {
      out[i] = DiffusionState::Immobile;
    } else if (alpha_t[i] > cfg.alpha_directed) {
      out[i] = DiffusionState::Directed;
    } else {
      const WindowBounds w = centered_window(t, n, cfg.window, 2);
      out[i] = window_scatter(positions, w.lo, w.hi) < cfg.confinement_radius
                   ? DiffusionState::Confined
                   : DiffusionState::Free;
    }
  }
  return out;
}

std::vector<ParamTrack> load_predictions(const std::string& path) {
  return read_param_tracks_csv(path);
}

void reconcile_predictions(const std::vector<ParamTrack>& predictions,
                           const std::vector<Trajectory>& trajectories) {
  std::map<int, int> lengths;
  for (const auto& t : trajectories) lengths[t.id] = t.length();
  std::map<int, bool> seen;
  for (const auto& p : predictions) {
    const auto it = lengths.find(p.traj_id);
    if (it == lengths.end()) {
      throw std::runtime_error("predictions: track " + std::to_string(p.traj_id) +
                               " has no matching trajectory");
    }
    if (seen[p.traj_id]) {
      throw std::runtime_error("predictions: duplicate track " + std::to_string(p.traj_id));
    }
    seen[p.traj_id] = true;
    if (p.length() != it->second) {
      throw std::runtime_error("predictions: track " + std::to_string(p.traj_id) + " length " +
                               std::to_string(p.length()) + " != trajectory length " +
                               std::to_string(it->second));
    }
  }
  for (const auto& [id, len] : lengths) {
    (void)len;
    if (!seen.count(id)) {
      throw std::runtime_error("predictions: trajectory " + std::to_string(id) +
                               " has no prediction track");
    }
  }
}

}  // namespace anomdiff
