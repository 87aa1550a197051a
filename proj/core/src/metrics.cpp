#include "anomdiff/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "anomdiff/link.hpp"

namespace anomdiff {

double gated_distance(double t_gt, double t_p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("gated_distance: eps must be positive");
  return std::min(std::abs(t_gt - t_p), eps);
}

CpMatchResult pair_changepoints(const std::vector<int>& gt, const std::vector<int>& pred,
                                double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("pair_changepoints: eps must be positive");
  CpMatchResult result;
  result.eps_cp = eps;
  const std::size_t n = gt.size(), m = pred.size();
  result.fn = static_cast<int>(n);
  result.fp = static_cast<int>(m);
  if (n == 0 || m == 0) return result;

  // Square padding at eps: an unmatched change point costs the gate value,
  // so the solver only pairs across when it beats leaving both unmatched.
  const std::size_t size = std::max(n, m);
  std::vector<std::vector<double>> cost(size, std::vector<double>(size, eps));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cost[i][j] = gated_distance(gt[i], pred[j], eps);
    }
  }
  const Assignment assignment = solve_assignment(cost);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = assignment.row_to_col[i];
    if (j < 0 || j >= static_cast<int>(m)) continue;
    result.pairs.emplace_back(static_cast<int>(i), j);
    if (gated_distance(gt[i], pred[static_cast<std::size_t>(j)], eps) < eps) ++result.tp;
  }
  result.fp = static_cast<int>(m) - result.tp;
  result.fn = static_cast<int>(n) - result.tp;
  return result;
}

double jsc(const CpMatchResult& m) {
  const int denom = m.tp + m.fp + m.fn;
  return denom == 0 ? 1.0 : static_cast<double>(m.tp) / denom;
}

double rmse_cp(const CpMatchResult& m, const std::vector<int>& gt, const std::vector<int>& pred) {
  double acc = 0.0;
  int count = 0;
  for (const auto& [i, j] : m.pairs) {
    const double d = std::abs(static_cast<double>(gt[static_cast<std::size_t>(i)]) -
                              pred[static_cast<std::size_t>(j)]);
    if (d < m.eps_cp) {
      acc += d * d;
      ++count;
    }
  }
  return count == 0 ? 0.0 : std::sqrt(acc / count);
}

double mae_alpha(const std::vector<double>& gt, const std::vector<double>& pred) {
  if (gt.size() != pred.size()) throw std::invalid_argument("mae_alpha: length mismatch");
  if (gt.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) acc += std::abs(gt[i] - pred[i]);
  return acc / static_cast<double>(gt.size());
}

double msle_k(const std::vector<double>& gt, const std::vector<double>& pred, int* clamped) {
  if (gt.size() != pred.size()) throw std::invalid_argument("msle_k: length mismatch");
  if (clamped) *clamped = 0;
  if (gt.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    double a = gt[i], b = pred[i];
    if (a < 0.0 || b < 0.0) {
      if (clamped) ++*clamped;
      a = std::max(a, 0.0);
      b = std::max(b, 0.0);
    }
    const double d = std::log1p(a) - std::log1p(b);
    acc += d * d;
  }
  return acc / static_cast<double>(gt.size());
}

double f1_state(const std::vector<DiffusionState>& gt, const std::vector<DiffusionState>& pred) {
  if (gt.size() != pred.size()) throw std::invalid_argument("f1_state: length mismatch");
  if (gt.empty()) return 1.0;
  std::array<long, kNumDiffusionStates> tp{}, fp{}, fn{};
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = static_cast<int>(gt[i]);
    const int p = static_cast<int>(pred[i]);
    if (g == p) {
      ++tp[static_cast<std::size_t>(g)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(g)];
    }
  }
  long tp_sum = 0, fp_sum = 0, fn_sum = 0;
  for (int c = 0; c < kNumDiffusionStates; ++c) {
    tp_sum += tp[static_cast<std::size_t>(c)];
    fp_sum += fp[static_cast<std::size_t>(c)];
    fn_sum += fn[static_cast<std::size_t>(c)];
  }
  const double denom = static_cast<double>(2 * tp_sum + fp_sum + fn_sum);
  return denom == 0.0 ? 1.0 : 2.0 * static_cast<double>(tp_sum) / denom;
}

double wasserstein1(std::vector<double> p, std::vector<double> q, bool restrict_to_q_support) {
  if (p.empty() || q.empty()) {
    throw std::invalid_argument("wasserstein1: empty sample set");
  }
  std::sort(p.begin(), p.end());
  std::sort(q.begin(), q.end());

  double lo, hi;
  if (restrict_to_q_support) {
    lo = q.front();
    hi = q.back();
  } else {
    lo = std::min(p.front(), q.front());
    hi = std::max(p.back(), q.back());
  }
  if (!(hi > lo)) return 0.0;  // point-mass support: zero-length interval

  // Right-continuous ECDFs are constant between consecutive sample values;
  // integrate |difference| exactly over those pieces.
  std::vector<double> breaks;
  breaks.push_back(lo);
  for (double v : p) {
    if (v > lo && v < hi) breaks.push_back(v);
  }
  for (double v : q) {
    if (v > lo && v < hi) breaks.push_back(v);
  }
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto ecdf = [](const std::vector<double>& sorted, double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
           static_cast<double>(sorted.size());
  };

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double x = breaks[i];
    integral += std::abs(ecdf(p, x) - ecdf(q, x)) * (breaks[i + 1] - breaks[i]);
  }
  return integral;
}

namespace {

struct FrameSeries {
  std::vector<double> alpha;
  std::vector<double> k;
  std::vector<DiffusionState> state;
};

FrameSeries broadcast_segments(const SegmentedTrajectory& seg) {
  FrameSeries out;
  out.alpha.resize(static_cast<std::size_t>(seg.length));
  out.k.resize(static_cast<std::size_t>(seg.length));
  out.state.resize(static_cast<std::size_t>(seg.length));
  for (const auto& s : seg.segments) {
    for (int t = s.start; t < s.end; ++t) {
      out.alpha[static_cast<std::size_t>(t)] = s.params.alpha;
      out.k[static_cast<std::size_t>(t)] = s.params.k;
      out.state[static_cast<std::size_t>(t)] = s.state;
    }
  }
  return out;
}

// Truth tracks are piecewise constant; their segments sit between CPs.
void truth_segment_samples(const ParamTrack& track, std::vector<double>& alphas,
                           std::vector<double>& ks) {
  const std::vector<int> cps = changepoints_from_track(track);
  std::vector<int> bounds{0};
  bounds.insert(bounds.end(), cps.begin(), cps.end());
  bounds.push_back(track.length());
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    alphas.push_back(track.alpha_t[static_cast<std::size_t>(bounds[i])]);
    ks.push_back(track.k_t[static_cast<std::size_t>(bounds[i])]);
  }
}

}  // namespace

EvaluationReport evaluate_experiment(const std::vector<SegmentedTrajectory>& predictions,
                                     const std::vector<ParamTrack>& truth_tracks,
                                     double eps_cp) {
  std::map<int, const SegmentedTrajectory*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.traj_id, &p).second) {
      throw std::runtime_error("evaluate: duplicate prediction for trajectory " +
                               std::to_string(p.traj_id));
    }
  }
  std::string mismatches;
  for (const auto& t : truth_tracks) {
    const auto it = by_id.find(t.traj_id);
    if (it == by_id.end()) {
      mismatches += " " + std::to_string(t.traj_id) + " (missing prediction)";
    } else if (it->second->length != t.length()) {
      mismatches += " " + std::to_string(t.traj_id) + " (length mismatch)";
    }
  }
  if (by_id.size() != truth_tracks.size() || !mismatches.empty()) {
    if (by_id.size() != truth_tracks.size()) mismatches += " (count mismatch)";
    throw std::runtime_error("evaluate: trajectory ids do not align:" + mismatches);
  }

  EvaluationReport report;
  report.n_trajs = static_cast<int>(truth_tracks.size());
  if (truth_tracks.empty()) {
    report.jsc_cp = 1.0;
    report.f1_state = 1.0;
    return report;
  }

  long tp = 0, fp = 0, fn = 0;
  double sq_cp = 0.0;
  long tp_pairs = 0;
  double abs_alpha = 0.0, sq_logk = 0.0;
  long frames = 0;
  std::vector<DiffusionState> gt_states, pred_states;
  std::vector<double> pred_alpha_samples, pred_k_samples, gt_alpha_samples, gt_k_samples;

  for (const auto& truth : truth_tracks) {
    const SegmentedTrajectory& pred = *by_id.at(truth.traj_id);
    const std::vector<int> gt_cps = changepoints_from_track(truth);
    const std::vector<int> pred_cps = pred.changepoints();
    const CpMatchResult match = pair_changepoints(gt_cps, pred_cps, eps_cp);
    tp += match.tp;
    fp += match.fp;
    fn += match.fn;
    for (const auto& [i, j] : match.pairs) {
      const double d = std::abs(static_cast<double>(gt_cps[static_cast<std::size_t>(i)]) -
                                pred_cps[static_cast<std::size_t>(j)]);
      if (d < eps_cp) {
        sq_cp += d * d;
        ++tp_pairs;
      }
    }

    const FrameSeries series = broadcast_segments(pred);
    for (int t = 0; t < truth.length(); ++t) {
      const std::size_t i = static_cast<std::size_t>(t);
      abs_alpha += std::abs(truth.alpha_t[i] - series.alpha[i]);
      double a = truth.k_t[i], b = series.k[i];
      if (a < 0.0 || b < 0.0) {
        ++report.msle_clamped;
        a = std::max(a, 0.0);
        b = std::max(b, 0.0);
      }
      const double d = std::log1p(a) - std::log1p(b);
      sq_logk += d * d;
    }
    frames += truth.length();
    gt_states.insert(gt_states.end(), truth.state_t.begin(), truth.state_t.end());
    pred_states.insert(pred_states.end(), series.state.begin(), series.state.end());

    for (const auto& s : pred.segments) {
      pred_alpha_samples.push_back(s.params.alpha);
      pred_k_samples.push_back(s.params.k);
    }
    truth_segment_samples(truth, gt_alpha_samples, gt_k_samples);
  }

  report.jsc_cp = tp + fp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
  report.rmse_cp = tp_pairs == 0 ? 0.0 : std::sqrt(sq_cp / static_cast<double>(tp_pairs));
  report.mae_alpha = frames == 0 ? 0.0 : abs_alpha / static_cast<double>(frames);
  report.msle_k = frames == 0 ? 0.0 : sq_logk / static_cast<double>(frames);
  report.f1_state = f1_state(gt_states, pred_states);
  report.w1_alpha = wasserstein1(pred_alpha_samples, gt_alpha_samples, true);
  report.w1_k = wasserstein1(pred_k_samples, gt_k_samples, true);
  report.w1_alpha_unrestricted = wasserstein1(pred_alpha_samples, gt_alpha_samples, false);
  report.w1_k_unrestricted = wasserstein1(pred_k_samples, gt_k_samples, false);
  return report;
}

EvaluationReport combine_reports(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("combine_reports: no reports");
  EvaluationReport out;
  long total = 0;
  for (const auto& r : reports) total += r.n_trajs;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    // Single-trajectory metrics weight by trajectory count; ensemble (W1)
    // metrics average arithmetically across experiments.
    const double w = total > 0 ? static_cast<double>(r.n_trajs) / static_cast<double>(total)
                               : 1.0 / n;
    out.rmse_cp += w * r.rmse_cp;
    out.jsc_cp += w * r.jsc_cp;
    out.mae_alpha += w * r.mae_alpha;
    out.msle_k += w * r.msle_k;
    out.f1_state += w * r.f1_state;
    out.w1_alpha += r.w1_alpha / n;
    out.w1_k += r.w1_k / n;
    out.w1_alpha_unrestricted += r.w1_alpha_unrestricted / n;
    out.w1_k_unrestricted += r.w1_k_unrestricted / n;
    out.n_trajs += r.n_trajs;
    out.msle_clamped += r.msle_clamped;
  }
  return out;
}

}  // namespace anomdiff
