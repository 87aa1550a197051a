#include "anomdiff/segment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "anomdiff/rng.hpp"

namespace anomdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty range");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Prefix-sum cost evaluator; L1 falls back to per-query selection.
class CostFn {
 public:
  CostFn(const std::vector<double>& series, CpCost cost) : series_(series), cost_(cost) {
    const std::size_t n = series.size();
    if (cost_ == CpCost::L2 || cost_ == CpCost::Linear) {
      sum_.assign(n + 1, 0.0);
      sum2_.assign(n + 1, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        sum_[i + 1] = sum_[i] + series[i];
        sum2_[i + 1] = sum2_[i] + series[i] * series[i];
      }
    }
    if (cost_ == CpCost::Linear) {
      sumt_.assign(n + 1, 0.0);
      sumt2_.assign(n + 1, 0.0);
      sumxt_.assign(n + 1, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        sumt_[i + 1] = sumt_[i] + t;
        sumt2_[i + 1] = sumt2_[i] + t * t;
        sumxt_[i + 1] = sumxt_[i] + series[i] * t;
      }
    }
  }

  double operator()(int a, int b) const {
    const double len = static_cast<double>(b - a);
    if (b - a <= 1) return 0.0;
    switch (cost_) {
      case CpCost::L2: {
        const double s = sum_[static_cast<std::size_t>(b)] - sum_[static_cast<std::size_t>(a)];
        const double s2 = sum2_[static_cast<std::size_t>(b)] - sum2_[static_cast<std::size_t>(a)];
        return std::max(s2 - s * s / len, 0.0);
      }
      case CpCost::L1: {
        std::vector<double> seg(series_.begin() + a, series_.begin() + b);
        const double med = median_of(seg);
        double acc = 0.0;
        for (double v : seg) acc += std::abs(v - med);
        return acc;
      }
      case CpCost::Linear: {
        if (b - a == 2) return 0.0;
        const double sx = sum_[static_cast<std::size_t>(b)] - sum_[static_cast<std::size_t>(a)];
        const double sxx = sum2_[static_cast<std::size_t>(b)] - sum2_[static_cast<std::size_t>(a)];
        const double st = sumt_[static_cast<std::size_t>(b)] - sumt_[static_cast<std::size_t>(a)];
        const double stt = sumt2_[static_cast<std::size_t>(b)] - sumt2_[static_cast<std::size_t>(a)];
        const double sxt = sumxt_[static_cast<std::size_t>(b)] - sumxt_[static_cast<std::size_t>(a)];
        const double denom = len * stt - st * st;
        if (denom <= 0.0) return 0.0;
        const double slope = (len * sxt - st * sx) / denom;
        const double intercept = (sx - slope * st) / len;
        // RSS = sum x^2 - slope*sum xt - intercept*sum x, clipped for roundoff.
        return std::max(sxx - slope * sxt - intercept * sx, 0.0);
      }
    }
    return 0.0;
  }

 private:
  const std::vector<double>& series_;
  CpCost cost_;
  std::vector<double> sum_, sum2_, sumt_, sumt2_, sumxt_;
};

std::vector<int> pelt(const CostFn& cost, int n, int min_seg, double penalty) {
  // F[t] = best objective of series[0..t) with segments >= min_seg;
  // F[0] = -penalty so each segment contributes cost + penalty.
  std::vector<double> f(static_cast<std::size_t>(n) + 1, kInf);
  std::vector<int> prev(static_cast<std::size_t>(n) + 1, -1);
  f[0] = -penalty;
  std::vector<int> cands{0};
  std::vector<int> removable_at(static_cast<std::size_t>(n) + 1, -1);

  for (int t = min_seg; t <= n; ++t) {
    // Candidates flagged for pruning become removable min_seg steps later.
    cands.erase(std::remove_if(cands.begin(), cands.end(),
                               [&](int s) {
                                 const int r = removable_at[static_cast<std::size_t>(s)];
                                 return r >= 0 && r <= t;
                               }),
                cands.end());
    for (int s : cands) {
      if (t - s < min_seg) continue;
      const double v = f[static_cast<std::size_t>(s)] + cost(s, t) + penalty;
      if (v < f[static_cast<std::size_t>(t)]) {
        f[static_cast<std::size_t>(t)] = v;
        prev[static_cast<std::size_t>(t)] = s;
      }
    }
    for (int s : cands) {
      if (t - s < min_seg) continue;
      if (removable_at[static_cast<std::size_t>(s)] >= 0) continue;
      if (f[static_cast<std::size_t>(s)] + cost(s, t) > f[static_cast<std::size_t>(t)]) {
        removable_at[static_cast<std::size_t>(s)] = t + min_seg;
      }
    }
    if (f[static_cast<std::size_t>(t)] < kInf) cands.push_back(t);
  }

  std::vector<int> cps;
  for (int t = prev[static_cast<std::size_t>(n)]; t > 0; t = prev[static_cast<std::size_t>(t)]) {
    cps.push_back(t);
  }
  std::reverse(cps.begin(), cps.end());
  return cps;
}

std::vector<int> binseg(const CostFn& cost, int n, int min_seg, double penalty) {
  std::vector<int> bounds{0, n};  // sorted segment boundaries
  for (;;) {
    double best_gain = -kInf;
    int best_cp = -1;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      const int a = bounds[i], b = bounds[i + 1];
      const double whole = cost(a, b);
      for (int t = a + min_seg; t + min_seg <= b; ++t) {
        const double gain = whole - cost(a, t) - cost(t, b);
        if (gain > best_gain) {
          best_gain = gain;
          best_cp = t;
        }
      }
    }
    if (best_cp < 0 || best_gain <= penalty) break;
    bounds.insert(std::upper_bound(bounds.begin(), bounds.end(), best_cp), best_cp);
  }
  return {bounds.begin() + 1, bounds.end() - 1};
}

std::vector<int> bottomup(const CostFn& cost, int n, int min_seg, double penalty) {
  std::vector<int> bounds{0};
  for (int t = min_seg; t + min_seg <= n; t += min_seg) bounds.push_back(t);
  bounds.push_back(n);
  while (bounds.size() > 2) {
    double best_gain = kInf;
    std::size_t best_i = 0;
    for (std::size_t i = 1; i + 1 < bounds.size(); ++i) {
      const double gain = cost(bounds[i - 1], bounds[i + 1]) - cost(bounds[i - 1], bounds[i]) -
                          cost(bounds[i], bounds[i + 1]);
      if (gain < best_gain) {
        best_gain = gain;
        best_i = i;
      }
    }
    if (best_gain > penalty) break;
    bounds.erase(bounds.begin() + static_cast<std::ptrdiff_t>(best_i));
  }
  return {bounds.begin() + 1, bounds.end() - 1};
}

std::vector<int> window_detect(const CostFn& cost, int n, int min_seg, double penalty,
                               int window_width) {
  const int h = std::max(min_seg, window_width / 2);
  std::vector<double> disc(static_cast<std::size_t>(n) + 1, -kInf);
  const int lo = std::max(h, min_seg);
  const int hi = std::min(n - h, n - min_seg);
  for (int t = lo; t <= hi; ++t) {
    disc[static_cast<std::size_t>(t)] = cost(t - h, t + h) - cost(t - h, t) - cost(t, t + h);
  }

  struct Peak {
    int t;
    double d;
  };
  std::vector<Peak> peaks;
  for (int t = lo; t <= hi; ++t) {
    const double d = disc[static_cast<std::size_t>(t)];
    if (d <= penalty) continue;
    const double left = t - 1 >= lo ? disc[static_cast<std::size_t>(t - 1)] : -kInf;
    const double right = t + 1 <= hi ? disc[static_cast<std::size_t>(t + 1)] : -kInf;
    // Plateau peaks keep their leftmost frame.
    if (d > left && d >= right) peaks.push_back({t, d});
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.d != b.d) return a.d > b.d;
    return a.t < b.t;
  });

  std::vector<int> cps;
  for (const auto& p : peaks) {
    bool ok = true;
    for (int c : cps) {
      if (std::abs(c - p.t) < min_seg) {
        ok = false;
        break;
      }
    }
    if (ok) cps.push_back(p.t);
  }
  std::sort(cps.begin(), cps.end());
  return cps;
}

struct StateRun {
  DiffusionState state;
  int len;
};

std::vector<StateRun> runs_of(const std::vector<DiffusionState>& states) {
  std::vector<StateRun> runs;
  for (const auto s : states) {
    if (!runs.empty() && runs.back().state == s) {
      ++runs.back().len;
    } else {
      runs.push_back({s, 1});
    }
  }
  return runs;
}

struct KmeansResult {
  std::vector<int> assign;
  std::array<std::array<double, 2>, 2> centers;
  double inertia = kInf;
};

double sqdist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

// Two-means with k-means++ seeding; points must be pre-sorted so the result
// is independent of caller ordering.
KmeansResult kmeans_two(const std::vector<std::array<double, 2>>& pts) {
  const std::size_t n = pts.size();
  Rng rng(0);
  KmeansResult best;
  for (int restart = 0; restart < 50; ++restart) {
    std::array<std::array<double, 2>, 2> centers;
    const std::size_t first = static_cast<std::size_t>(rng.uniform_index(n));
    centers[0] = pts[first];
    std::vector<double> d2(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = sqdist(pts[i], centers[0]);
      total += d2[i];
    }
    if (total <= 0.0) {
      centers[1] = centers[0];
    } else {
      double target = rng.uniform() * total;
      std::size_t pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
      centers[1] = pts[pick];
    }

    std::vector<int> assign(n, 0);
    double inertia = kInf;
    for (int iter = 0; iter < 200; ++iter) {
      double new_inertia = 0.0;
      std::array<std::array<double, 2>, 2> sums{{{0.0, 0.0}, {0.0, 0.0}}};
      std::array<int, 2> counts{0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        const double da = sqdist(pts[i], centers[0]);
        const double db = sqdist(pts[i], centers[1]);
        const int c = db < da ? 1 : 0;  // ties to the lower index
        assign[i] = c;
        new_inertia += std::min(da, db);
        sums[static_cast<std::size_t>(c)][0] += pts[i][0];
        sums[static_cast<std::size_t>(c)][1] += pts[i][1];
        ++counts[static_cast<std::size_t>(c)];
      }
      for (int c = 0; c < 2; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centers[static_cast<std::size_t>(c)][0] =
              sums[static_cast<std::size_t>(c)][0] / counts[static_cast<std::size_t>(c)];
          centers[static_cast<std::size_t>(c)][1] =
              sums[static_cast<std::size_t>(c)][1] / counts[static_cast<std::size_t>(c)];
        }
      }
      if (inertia - new_inertia <= 1e-9 * std::max(1.0, inertia) && iter > 0) {
        inertia = new_inertia;
        break;
      }
      inertia = new_inertia;
    }
    if (inertia < best.inertia) {
      best.assign = assign;
      best.centers = centers;
      best.inertia = inertia;
    }
  }
  return best;
}

}  // namespace

std::string to_string(CpAlgorithm a) {
  switch (a) {
    case CpAlgorithm::Pelt: return "pelt";
    case CpAlgorithm::BinSeg: return "binseg";
    case CpAlgorithm::BottomUp: return "bottomup";
    case CpAlgorithm::Window: return "window";
  }
  return "window";
}

std::string to_string(CpCost c) {
  switch (c) {
    case CpCost::L1: return "l1";
    case CpCost::L2: return "l2";
    case CpCost::Linear: return "linear";
  }
  return "l2";
}

CpAlgorithm cp_algorithm_from_string(const std::string& name) {
  if (name == "pelt") return CpAlgorithm::Pelt;
  if (name == "binseg") return CpAlgorithm::BinSeg;
  if (name == "bottomup") return CpAlgorithm::BottomUp;
  if (name == "window") return CpAlgorithm::Window;
  throw std::invalid_argument("unknown change-point algorithm '" + name + "'");
}

CpCost cp_cost_from_string(const std::string& name) {
  if (name == "l1") return CpCost::L1;
  if (name == "l2") return CpCost::L2;
  if (name == "linear") return CpCost::Linear;
  throw std::invalid_argument("unknown cost model '" + name + "'");
}

void CpConfig::check_valid() const {
  if (min_segment < 1) throw std::invalid_argument("CpConfig: min_segment must be >= 1");
  if (window_width < 2 * min_segment) {
    throw std::invalid_argument("CpConfig: window_width must be >= 2*min_segment");
  }
  if (std::isnan(penalty)) throw std::invalid_argument("CpConfig: penalty is NaN");
}

double segment_cost(const std::vector<double>& series, int a, int b, CpCost cost) {
  if (a < 0 || b > static_cast<int>(series.size()) || a >= b) {
    throw std::invalid_argument("segment_cost: need 0 <= a < b <= n");
  }
  return CostFn(series, cost)(a, b);
}

double auto_penalty(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 3) return 1e-12;
  std::vector<double> diffs(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) diffs[i] = series[i + 1] - series[i];
  const double med = median_of(diffs);
  for (auto& d : diffs) d = std::abs(d - med);
  const double mad = median_of(diffs);
  const double sigma = mad / (0.6745 * std::sqrt(2.0));
  const double var = std::max(sigma * sigma, 1e-12);
  return 3.0 * var * std::log(static_cast<double>(n));
}

std::vector<int> detect_changepoints(const std::vector<double>& series, const CpConfig& cfg) {
  cfg.check_valid();
  const int n = static_cast<int>(series.size());
  if (n < 2 * cfg.min_segment) return {};
  const double penalty = cfg.penalty < 0.0 ? auto_penalty(series) : cfg.penalty;
  const CostFn cost(series, cfg.cost);
  switch (cfg.algorithm) {
    case CpAlgorithm::Pelt: return pelt(cost, n, cfg.min_segment, penalty);
    case CpAlgorithm::BinSeg: return binseg(cost, n, cfg.min_segment, penalty);
    case CpAlgorithm::BottomUp: return bottomup(cost, n, cfg.min_segment, penalty);
    case CpAlgorithm::Window: return window_detect(cost, n, cfg.min_segment, penalty, cfg.window_width);
  }
  return {};
}

std::vector<DiffusionState> smooth_states(const std::vector<DiffusionState>& states) {
  if (states.empty()) throw std::invalid_argument("smooth_states: empty sequence");
  std::vector<StateRun> runs = runs_of(states);
  for (;;) {
    if (runs.size() <= 1) break;
    std::size_t victim = runs.size();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].len < 3) {
        victim = i;
        break;
      }
    }
    if (victim == runs.size()) break;

    std::size_t target;
    if (victim == 0) {
      target = 1;
    } else if (victim + 1 == runs.size()) {
      target = victim - 1;
    } else {
      // Longer neighbor absorbs; the earlier one wins ties.
      target = runs[victim - 1].len >= runs[victim + 1].len ? victim - 1 : victim + 1;
    }
    runs[target].len += runs[victim].len;
    runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(victim));
    // Merge newly adjacent equal-state runs.
    for (std::size_t i = 0; i + 1 < runs.size();) {
      if (runs[i].state == runs[i + 1].state) {
        runs[i].len += runs[i + 1].len;
        runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(i + 1));
      } else {
        ++i;
      }
    }
  }

  std::vector<DiffusionState> out;
  out.reserve(states.size());
  for (const auto& r : runs) out.insert(out.end(), static_cast<std::size_t>(r.len), r.state);
  return out;
}

SegmentedTrajectory normalize_trajectory(const ParamTrack& track, const CpConfig& cfg) {
  cfg.check_valid();
  track.check_valid();
  const int n = track.length();
  const std::vector<DiffusionState> states = smooth_states(track.state_t);

  auto standardized = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    std::vector<double> out;
    if (var <= 0.0) return out;  // constant channel carries no change points
    out.reserve(v.size());
    const double sd = std::sqrt(var);
    for (double x : v) out.push_back((x - mean) / sd);
    return out;
  };

  std::vector<int> cps;
  for (const auto* channel : {&track.alpha_t, &track.k_t}) {
    const std::vector<double> z = standardized(*channel);
    if (z.empty()) continue;
    const std::vector<int> c = detect_changepoints(z, cfg);
    cps.insert(cps.end(), c.begin(), c.end());
  }
  std::sort(cps.begin(), cps.end());
  std::vector<int> fused;
  for (int cp : cps) {
    if (cp < cfg.min_segment || cp > n - cfg.min_segment) continue;
    if (!fused.empty() && cp - fused.back() < cfg.min_segment) continue;
    fused.push_back(cp);
  }

  SegmentedTrajectory seg;
  seg.traj_id = track.traj_id;
  seg.length = n;
  std::vector<int> bounds{0};
  bounds.insert(bounds.end(), fused.begin(), fused.end());
  bounds.push_back(n);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const int a = bounds[i], b = bounds[i + 1];
    Segment s;
    s.start = a;
    s.end = b;
    s.params = DiffusionParams(
        median_of(std::vector<double>(track.alpha_t.begin() + a, track.alpha_t.begin() + b)),
        median_of(std::vector<double>(track.k_t.begin() + a, track.k_t.begin() + b)));
    std::array<int, kNumDiffusionStates> votes{};
    for (int t = a; t < b; ++t) ++votes[static_cast<std::size_t>(states[static_cast<std::size_t>(t)])];
    int best = 0;
    for (int c = 1; c < kNumDiffusionStates; ++c) {
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    s.state = diffusion_state_from_int(best);
    seg.segments.push_back(s);
  }
  seg.check_valid();
  return seg;
}

EnsembleSummary aggregate_ensemble(const std::vector<SegmentedTrajectory>& trajectories,
                                   bool force_two_states) {
  std::vector<std::array<double, 2>> pts;
  bool multiple = force_two_states;
  for (const auto& traj : trajectories) {
    if (traj.segments.size() > 1) multiple = true;
    for (const auto& s : traj.segments) pts.push_back({s.params.alpha, s.params.k});
  }
  if (pts.empty()) throw std::invalid_argument("aggregate_ensemble: no segments");
  std::sort(pts.begin(), pts.end());

  auto cluster_stats = [&](const std::vector<int>& assign, int c) {
    EnsembleCluster out;
    int count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (assign[i] != c) continue;
      out.mean_alpha += pts[i][0];
      out.mean_k += pts[i][1];
      ++count;
    }
    out.mean_alpha /= count;
    out.mean_k /= count;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (assign[i] != c) continue;
      out.std_alpha += (pts[i][0] - out.mean_alpha) * (pts[i][0] - out.mean_alpha);
      out.std_k += (pts[i][1] - out.mean_k) * (pts[i][1] - out.mean_k);
    }
    out.std_alpha = std::sqrt(out.std_alpha / count);
    out.std_k = std::sqrt(out.std_k / count);
    out.weight = static_cast<double>(count) / static_cast<double>(pts.size());
    return out;
  };

  EnsembleSummary summary;
  const std::vector<int> all_zero(pts.size(), 0);
  if (!multiple) {
    summary.n_states = 1;
    summary.clusters.push_back(cluster_stats(all_zero, 0));
    return summary;
  }

  const bool all_equal =
      std::adjacent_find(pts.begin(), pts.end(), std::not_equal_to<>()) == pts.end();
  if (pts.size() < 2 || all_equal) {
    summary.n_states = 1;
    summary.collapsed = true;
    summary.clusters.push_back(cluster_stats(all_zero, 0));
    return summary;
  }

  // Standardize for clustering; stats are reported in raw units.
  std::vector<std::array<double, 2>> zpts = pts;
  for (int dim = 0; dim < 2; ++dim) {
    double mean = 0.0;
    for (const auto& p : zpts) mean += p[static_cast<std::size_t>(dim)];
    mean /= static_cast<double>(zpts.size());
    double var = 0.0;
    for (const auto& p : zpts) {
      const double d = p[static_cast<std::size_t>(dim)] - mean;
      var += d * d;
    }
    var /= static_cast<double>(zpts.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (auto& p : zpts) {
      p[static_cast<std::size_t>(dim)] = (p[static_cast<std::size_t>(dim)] - mean) / sd;
    }
  }

  const KmeansResult km = kmeans_two(zpts);
  std::array<int, 2> counts{0, 0};
  for (int c : km.assign) ++counts[static_cast<std::size_t>(c)];
  if (counts[0] == 0 || counts[1] == 0) {
    summary.n_states = 1;
    summary.collapsed = true;
    summary.clusters.push_back(cluster_stats(all_zero, 0));
    return summary;
  }

  summary.n_states = 2;
  EnsembleCluster a = cluster_stats(km.assign, 0);
  EnsembleCluster b = cluster_stats(km.assign, 1);
  if (std::tie(b.mean_k, b.mean_alpha) < std::tie(a.mean_k, a.mean_alpha)) std::swap(a, b);
  summary.clusters.push_back(a);
  summary.clusters.push_back(b);
  return summary;
}

}  // namespace anomdiff
