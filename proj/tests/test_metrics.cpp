#include <algorithm>
#include <cmath>
#include <vector>

#include "anomdiff/metrics.hpp"
#include "anomdiff/rng.hpp"
#include "anomdiff/segment.hpp"
#include "doctest.h"

using namespace anomdiff;

namespace {

// Brute-force |CDF_P - CDF_Q| integration on a fine grid; the independent
// oracle for wasserstein1.
double w1_grid(const std::vector<double>& p, const std::vector<double>& q, double lo, double hi) {
  auto cdf = [](const std::vector<double>& sorted, double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                               sorted.begin()) /
           static_cast<double>(sorted.size());
  };
  std::vector<double> ps = p, qs = q;
  std::sort(ps.begin(), ps.end());
  std::sort(qs.begin(), qs.end());
  const int steps = 200000;
  const double dx = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = lo + (i + 0.5) * dx;
    acc += std::abs(cdf(ps, x) - cdf(qs, x)) * dx;
  }
  return acc;
}

ParamTrack flat_track(int id, int n, double alpha, double k,
                      DiffusionState s = DiffusionState::Free) {
  ParamTrack t;
  t.traj_id = id;
  t.alpha_t.assign(static_cast<std::size_t>(n), alpha);
  t.k_t.assign(static_cast<std::size_t>(n), k);
  t.state_t.assign(static_cast<std::size_t>(n), s);
  return t;
}

std::vector<DiffusionState> states_of(const std::vector<int>& codes) {
  std::vector<DiffusionState> out;
  for (int c : codes) out.push_back(static_cast<DiffusionState>(c));
  return out;
}

}  // namespace

TEST_CASE("gated distance") {
  CHECK(gated_distance(100, 104, 10) == 4.0);
  CHECK(gated_distance(100, 150, 10) == 10.0);
  CHECK(gated_distance(42, 42, 10) == 0.0);
  CHECK(gated_distance(104, 100, 10) == 4.0);
  CHECK_THROWS_AS(gated_distance(0, 0, 0), std::invalid_argument);
}

TEST_CASE("pair_changepoints: simple hit") {
  CpMatchResult m = pair_changepoints({50}, {53});
  CHECK(m.tp == 1);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0] == std::pair<int, int>{0, 0});
}

TEST_CASE("pair_changepoints: beyond the gate") {
  CpMatchResult m = pair_changepoints({50}, {80});
  CHECK(m.tp == 0);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
}

TEST_CASE("pair_changepoints: crossing beats greedy") {
  CpMatchResult m = pair_changepoints({10, 20}, {19, 11});
  CHECK(m.tp == 2);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
}

TEST_CASE("pair_changepoints: boundary distances") {
  // d = 10 is not a TP under the strict gate; d = 9 is
  CHECK(pair_changepoints({100}, {110}).tp == 0);
  CHECK(pair_changepoints({100}, {109}).tp == 1);
}

TEST_CASE("pair_changepoints: uneven list sizes") {
  CpMatchResult m = pair_changepoints({10, 50, 90}, {11});
  CHECK(m.tp == 1);
  CHECK(m.fp == 0);
  CHECK(m.fn == 2);
  CpMatchResult m2 = pair_changepoints({}, {5, 6});
  CHECK(m2.tp == 0);
  CHECK(m2.fp == 2);
  CHECK(m2.fn == 0);
}

TEST_CASE("jsc values") {
  CpMatchResult m;
  m.tp = 2;
  m.fp = 1;
  m.fn = 1;
  CHECK(jsc(m) == 0.5);
  m.tp = 0;
  m.fp = 3;
  m.fn = 0;
  CHECK(jsc(m) == 0.0);
  CpMatchResult empty;
  CHECK(jsc(empty) == 1.0);
}

TEST_CASE("rmse over true-positive pairs") {
  CpMatchResult m = pair_changepoints({50}, {53});
  CHECK(rmse_cp(m, {50}, {53}) == doctest::Approx(3.0));
  CpMatchResult m2 = pair_changepoints({10, 20}, {11, 19});
  CHECK(rmse_cp(m2, {10, 20}, {11, 19}) == doctest::Approx(1.0));
  CpMatchResult m3 = pair_changepoints({50}, {80});
  CHECK(rmse_cp(m3, {50}, {80}) == 0.0);
}

TEST_CASE("mae fixtures") {
  CHECK(mae_alpha({1.0, 0.5}, {1.2, 0.4}) == doctest::Approx(0.15));
  CHECK(mae_alpha({1.0, 1.0}, {1.0, 1.0}) == 0.0);
  CHECK_THROWS_AS(mae_alpha({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("msle fixtures") {
  CHECK(msle_k({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(msle_k({std::exp(1.0) - 1.0}, {0.0}) == doctest::Approx(1.0));
  int clamped = 0;
  CHECK(msle_k({0.0}, {-1.0}, &clamped) == doctest::Approx(0.0));
  CHECK(clamped == 1);
}

TEST_CASE("msle matches a direct re-implementation on random pairs") {
  Rng rng(3);
  std::vector<double> gt, pred;
  for (int i = 0; i < 500; ++i) {
    gt.push_back(rng.uniform(0, 5));
    pred.push_back(rng.uniform(0, 5));
  }
  double acc = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double d = std::log1p(gt[static_cast<std::size_t>(i)]) -
                     std::log1p(pred[static_cast<std::size_t>(i)]);
    acc += d * d;
  }
  CHECK(msle_k(gt, pred) == doctest::Approx(acc / 500.0).epsilon(1e-12));
}

TEST_CASE("f1 fixtures") {
  CHECK(f1_state(states_of({0, 1, 2, 3}), states_of({0, 1, 2, 3})) == 1.0);
  CHECK(f1_state(states_of({0, 0, 0}), states_of({1, 1, 1})) == 0.0);
  // micro-F1 equals accuracy for single-label-per-frame classification
  CHECK(f1_state(states_of({2, 2, 2, 2}), states_of({2, 2, 2, 1})) == doctest::Approx(0.75));
  CHECK_THROWS_AS(f1_state(states_of({0}), states_of({0, 1})), std::invalid_argument);
}

TEST_CASE("w1: identical samples") {
  CHECK(wasserstein1({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(wasserstein1({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, false) == 0.0);
}

TEST_CASE("w1: point masses, restricted vs unrestricted") {
  // supp(Q) = [1, 1] is degenerate, so the restricted integral vanishes
  CHECK(wasserstein1({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}) == 0.0);
  CHECK(wasserstein1({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, false) == doctest::Approx(1.0));
}

TEST_CASE("w1: two-sample fixture against the grid oracle") {
  const std::vector<double> p = {0.0, 1.0};
  const std::vector<double> q = {0.0, 2.0};
  // restricted: integrate |CDF_P - CDF_Q| over [0, 2]
  CHECK(wasserstein1(p, q) == doctest::Approx(w1_grid(p, q, 0.0, 2.0)).epsilon(1e-4));
  CHECK(wasserstein1(p, q) == doctest::Approx(0.5).epsilon(1e-9));
  // unrestricted is identical here: the CDFs agree outside [0, 2]
  CHECK(wasserstein1(p, q, false) == doctest::Approx(0.5).epsilon(1e-9));
  // classic equal-size estimator: mean |sorted P - sorted Q|
  CHECK(wasserstein1(p, q, false) == doctest::Approx((0.0 + 1.0) / 2.0));
}

TEST_CASE("w1: random samples vs grid oracle, both modes") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p, q;
    const int np = 1 + static_cast<int>(rng.uniform_index(12));
    const int nq = 2 + static_cast<int>(rng.uniform_index(12));
    for (int i = 0; i < np; ++i) p.push_back(rng.uniform(-3, 3));
    for (int i = 0; i < nq; ++i) q.push_back(rng.uniform(-3, 3));
    const double lo_q = *std::min_element(q.begin(), q.end());
    const double hi_q = *std::max_element(q.begin(), q.end());
    if (hi_q - lo_q < 1e-6) continue;
    CHECK(wasserstein1(p, q) ==
          doctest::Approx(w1_grid(p, q, lo_q, hi_q)).epsilon(5e-4));
    const double lo = std::min(lo_q, *std::min_element(p.begin(), p.end())) - 1.0;
    const double hi = std::max(hi_q, *std::max_element(p.begin(), p.end())) + 1.0;
    CHECK(wasserstein1(p, q, false) == doctest::Approx(w1_grid(p, q, lo, hi)).epsilon(5e-4));
  }
}

TEST_CASE("w1: unrestricted symmetry and shift bound") {
  Rng rng(13);
  std::vector<double> p, q;
  for (int i = 0; i < 15; ++i) p.push_back(rng.uniform(0, 2));
  for (int i = 0; i < 9; ++i) q.push_back(rng.uniform(0, 2));
  CHECK(wasserstein1(p, q, false) == doctest::Approx(wasserstein1(q, p, false)).epsilon(1e-12));

  const double base = wasserstein1(p, q, false);
  for (double delta : {0.05, 0.3, 1.0}) {
    std::vector<double> shifted = p;
    for (double& v : shifted) v += delta;
    const double moved = wasserstein1(shifted, q, false);
    CHECK(std::abs(moved - base) <= delta + 1e-12);
  }
}

TEST_CASE("w1: equal-size classic estimator agreement") {
  Rng rng(21);
  std::vector<double> p, q;
  for (int i = 0; i < 40; ++i) {
    p.push_back(rng.uniform(-1, 1));
    q.push_back(rng.uniform(-1, 1));
  }
  std::vector<double> ps = p, qs = q;
  std::sort(ps.begin(), ps.end());
  std::sort(qs.begin(), qs.end());
  double classic = 0.0;
  for (int i = 0; i < 40; ++i) classic += std::abs(ps[static_cast<std::size_t>(i)] - qs[static_cast<std::size_t>(i)]);
  classic /= 40.0;
  CHECK(wasserstein1(p, q, false) == doctest::Approx(classic).epsilon(1e-12));
}

TEST_CASE("evaluate_experiment: perfect predictions score perfectly") {
  std::vector<ParamTrack> truth;
  std::vector<SegmentedTrajectory> preds;
  for (int i = 0; i < 5; ++i) {
    ParamTrack t = flat_track(i, 60, 0.8, 0.5, DiffusionState::Free);
    for (int f = 30; f < 60; ++f) {
      t.alpha_t[static_cast<std::size_t>(f)] = 1.4;
      t.k_t[static_cast<std::size_t>(f)] = 1.5;
      t.state_t[static_cast<std::size_t>(f)] = DiffusionState::Directed;
    }
    truth.push_back(t);
    SegmentedTrajectory s;
    s.traj_id = i;
    s.length = 60;
    s.segments = {{0, 30, DiffusionParams(0.8, 0.5), DiffusionState::Free},
                  {30, 60, DiffusionParams(1.4, 1.5), DiffusionState::Directed}};
    preds.push_back(s);
  }
  EvaluationReport r = evaluate_experiment(preds, truth);
  CHECK(r.n_trajs == 5);
  CHECK(r.rmse_cp == 0.0);
  CHECK(r.jsc_cp == 1.0);
  CHECK(r.mae_alpha == 0.0);
  CHECK(r.msle_k == 0.0);
  CHECK(r.f1_state == 1.0);
  CHECK(r.w1_alpha == doctest::Approx(0.0));
  CHECK(r.w1_k == doctest::Approx(0.0));
  CHECK(r.w1_alpha_unrestricted == doctest::Approx(0.0));
}

TEST_CASE("evaluate_experiment: known deviations") {
  ParamTrack t = flat_track(0, 10, 1.0, 1.0, DiffusionState::Free);
  SegmentedTrajectory s;
  s.traj_id = 0;
  s.length = 10;
  s.segments = {{0, 10, DiffusionParams(1.2, 1.0), DiffusionState::Free}};
  EvaluationReport r = evaluate_experiment({s}, {t});
  CHECK(r.mae_alpha == doctest::Approx(0.2));
  CHECK(r.jsc_cp == 1.0);  // no CPs on either side
  CHECK(r.f1_state == 1.0);
}

TEST_CASE("evaluate_experiment: id mismatch reported") {
  ParamTrack t = flat_track(0, 10, 1.0, 1.0);
  SegmentedTrajectory s;
  s.traj_id = 1;
  s.length = 10;
  s.segments = {{0, 10, DiffusionParams(1.0, 1.0), DiffusionState::Free}};
  CHECK_THROWS_AS(evaluate_experiment({s}, {t}), std::runtime_error);
}

TEST_CASE("combine_reports weights by trajectory count") {
  EvaluationReport a;
  a.mae_alpha = 0.1;
  a.n_trajs = 100;
  a.w1_alpha = 0.2;
  EvaluationReport b;
  b.mae_alpha = 0.3;
  b.n_trajs = 300;
  b.w1_alpha = 0.4;
  EvaluationReport c = combine_reports({a, b});
  CHECK(c.mae_alpha == doctest::Approx(0.25));
  CHECK(c.n_trajs == 400);
  // ensemble metrics averaged arithmetically, not weighted
  CHECK(c.w1_alpha == doctest::Approx(0.3));
}
