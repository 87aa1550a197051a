#include <algorithm>
#include <cmath>
#include <vector>

#include "anomdiff/csv.hpp"
#include "anomdiff/fbm.hpp"
#include "anomdiff/infer.hpp"
#include "anomdiff/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace anomdiff;

namespace {

Trajectory fbm_trajectory(int id, int length, double alpha, double k, std::uint64_t seed) {
  Rng rng(seed);
  const Displacements d = sample_fbm_displacements(length - 1, DiffusionParams(alpha, k), rng);
  Trajectory t;
  t.id = id;
  t.points.push_back({0.0, 0.0});
  for (int i = 0; i < length - 1; ++i) {
    t.points.push_back({t.points.back().x + d.dx[i], t.points.back().y + d.dy[i]});
  }
  return t;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("estimator config validation") {
  EstimatorConfig cfg;
  CHECK_NOTHROW(cfg.check_valid());
  cfg.window = 8;  // even
  CHECK_THROWS_AS(cfg.check_valid(), std::invalid_argument);
  cfg = EstimatorConfig{};
  cfg.window = 7;  // below 2*min_lags + 1
  CHECK_THROWS_AS(cfg.check_valid(), std::invalid_argument);
}

TEST_CASE("to_displacements basics") {
  Trajectory t;
  t.id = 0;
  t.points = {{0, 0}, {1, 0}, {3, 0}};
  auto d = to_displacements(t);
  REQUIRE(d.size() == 2);
  CHECK(d[0].dx == 1.0);
  CHECK(d[1].dx == 2.0);
  CHECK(d[0].dy == 0.0);

  auto d2 = to_displacements(t, 2.0);
  CHECK(d2[0].dx == 2.0);
  CHECK(d2[1].dx == 4.0);

  Trajectory c;
  c.points = {{5, 5}, {5, 5}, {5, 5}};
  for (const auto& dd : to_displacements(c)) {
    CHECK(dd.dx == 0.0);
    CHECK(dd.dy == 0.0);
  }

  Trajectory single;
  single.points = {{1, 1}};
  CHECK(to_displacements(single).empty());
}

TEST_CASE("estimator: ballistic path reads as directed") {
  Trajectory t;
  t.id = 0;
  for (int i = 0; i < 100; ++i) t.points.push_back({static_cast<double>(i), 0.0});
  EstimatorConfig cfg;
  auto res = estimate_params_window(t, cfg);
  CHECK(!res.low_confidence);
  REQUIRE(res.track.length() == 100);
  for (int f = 20; f < 80; ++f) {
    CHECK(res.track.alpha_t[f] == doctest::Approx(2.0).epsilon(0.025));
    CHECK(res.track.state_t[f] == DiffusionState::Directed);
  }
}

TEST_CASE("estimator: frozen particle reads as immobile") {
  Trajectory t;
  t.id = 0;
  for (int i = 0; i < 60; ++i) t.points.push_back({7.5, -2.5});
  auto res = estimate_params_window(t, EstimatorConfig{});
  for (int f = 0; f < 60; ++f) {
    CHECK(res.track.k_t[f] == 0.0);
    CHECK(res.track.state_t[f] == DiffusionState::Immobile);
  }
}

TEST_CASE("estimator: subdiffusive fbm recovered within the oracle band") {
  std::vector<double> medians;
  for (int s = 0; s < 100; ++s) {
    Trajectory t = fbm_trajectory(s, 208, 0.5, 1.0, 500 + static_cast<std::uint64_t>(s));
    auto res = estimate_params_window(t, EstimatorConfig{});
    std::vector<double> interior(res.track.alpha_t.begin() + 30, res.track.alpha_t.end() - 30);
    medians.push_back(median_of(interior));
  }
  const double overall = median_of(medians);
  CHECK(overall > 0.3);
  CHECK(overall < 0.7);
}

TEST_CASE("estimator: scaling positions scales k by c^2 and keeps alpha") {
  Trajectory t = fbm_trajectory(1, 120, 1.0, 0.5, 99);
  Trajectory scaled = t;
  for (Point& p : scaled.points) {
    p.x *= 3.0;
    p.y *= 3.0;
  }
  auto a = estimate_params_window(t, EstimatorConfig{});
  auto b = estimate_params_window(scaled, EstimatorConfig{});
  for (int f = 0; f < 120; ++f) {
    CHECK(b.track.alpha_t[f] == doctest::Approx(a.track.alpha_t[f]).epsilon(1e-9));
    CHECK(b.track.k_t[f] == doctest::Approx(9.0 * a.track.k_t[f]).epsilon(1e-9));
  }
}

TEST_CASE("estimator: output length always matches the trajectory") {
  for (int len : {9, 31, 57, 208}) {
    Trajectory t = fbm_trajectory(0, len, 1.0, 1.0, 42);
    auto res = estimate_params_window(t, EstimatorConfig{});
    CHECK(res.track.length() == len);
    CHECK_NOTHROW(res.track.check_valid());
  }
}

TEST_CASE("estimator: short trajectory falls back flagged") {
  Trajectory t;
  t.id = 3;
  t.points = {{0, 0}, {1, 1}, {2, 2}};  // below min_lags + 2
  auto res = estimate_params_window(t, EstimatorConfig{});
  CHECK(res.low_confidence);
  REQUIRE(res.track.length() == 3);
  CHECK(res.track.alpha_t[0] == 1.0);
  // mean squared step = (1+1 + 1+1)/2 = 2, halved -> 1
  CHECK(res.track.k_t[0] == doctest::Approx(1.0));
}

TEST_CASE("estimator: error shrinks as the window grows") {
  // mean |alpha_hat - 1| over fbm ensembles, window 11 vs 61
  auto mean_err = [](int window) {
    EstimatorConfig cfg;
    cfg.window = window;
    double acc = 0.0;
    int count = 0;
    for (int s = 0; s < 60; ++s) {
      Trajectory t = fbm_trajectory(s, 208, 1.0, 1.0, 7000 + static_cast<std::uint64_t>(s));
      auto res = estimate_params_window(t, cfg);
      for (int f = 40; f < 168; ++f) {
        acc += std::abs(res.track.alpha_t[f] - 1.0);
        ++count;
      }
    }
    return acc / count;
  };
  CHECK(mean_err(61) < mean_err(11));
}

TEST_CASE("classify_state thresholds") {
  EstimatorConfig cfg;
  std::vector<Point> wandering;
  for (int i = 0; i < 50; ++i) {
    wandering.push_back({static_cast<double>(5 * (i % 2) + i), static_cast<double>(3 * (i % 3))});
  }
  std::vector<double> alpha(50, 1.0), k(50, 1.0);

  SUBCASE("immobile wins first") {
    std::vector<double> k0(50, 0.0);
    auto states = classify_state(alpha, k0, wandering, cfg);
    for (auto s : states) CHECK(s == DiffusionState::Immobile);
  }
  SUBCASE("directed above the alpha threshold") {
    std::vector<double> a(50, 1.95);
    auto states = classify_state(a, k, wandering, cfg);
    for (auto s : states) CHECK(s == DiffusionState::Directed);
  }
  SUBCASE("tight scatter reads confined") {
    std::vector<Point> huddle(50, Point{10.0, 10.0});
    for (std::size_t i = 0; i < huddle.size(); ++i) {
      huddle[i].x += 0.2 * ((i % 3) - 1.0);
    }
    auto states = classify_state(alpha, k, huddle, cfg);
    for (auto s : states) CHECK(s == DiffusionState::Confined);
  }
  SUBCASE("wide wander reads free") {
    std::vector<Point> spread;
    for (int i = 0; i < 50; ++i) spread.push_back({i * 2.0, i * 1.5});
    auto states = classify_state(alpha, k, spread, cfg);
    CHECK(std::count(states.begin(), states.end(), DiffusionState::Free) >= 40);
  }
}

TEST_CASE("load_predictions round-trip and validation") {
  testutil::TempDir tmp("anomdiff-pred");
  ParamTrack t;
  t.traj_id = 2;
  t.alpha_t = {0.5, 1.5};
  t.k_t = {1.0, 2.0};
  t.state_t = {DiffusionState::Free, DiffusionState::Directed};
  const std::string path = tmp.file("pred.csv");
  write_file(path, to_csv(std::vector<ParamTrack>{t}));
  auto back = load_predictions(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].alpha_t == t.alpha_t);

  write_file(path, "traj_id,frame,alpha,k,state\n");
  CHECK(load_predictions(path).empty());

  write_file(path, "traj_id,frame,alpha,k,state\n0,0,1.0,1.0,4\n");
  try {
    load_predictions(path);
    FAIL("expected throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("reconcile_predictions enforces the id/length bijection") {
  Trajectory t;
  t.id = 5;
  t.points = {{0, 0}, {1, 1}, {2, 2}};
  ParamTrack p;
  p.traj_id = 5;
  p.alpha_t = {1, 1, 1};
  p.k_t = {1, 1, 1};
  p.state_t = {DiffusionState::Free, DiffusionState::Free, DiffusionState::Free};
  CHECK_NOTHROW(reconcile_predictions({p}, {t}));

  ParamTrack wrong_len = p;
  wrong_len.alpha_t.pop_back();
  wrong_len.k_t.pop_back();
  wrong_len.state_t.pop_back();
  CHECK_THROWS_AS(reconcile_predictions({wrong_len}, {t}), std::runtime_error);

  ParamTrack wrong_id = p;
  wrong_id.traj_id = 6;
  CHECK_THROWS_AS(reconcile_predictions({wrong_id}, {t}), std::runtime_error);
  CHECK_THROWS_AS(reconcile_predictions({}, {t}), std::runtime_error);
  CHECK_THROWS_AS(reconcile_predictions({p, p}, {t}), std::runtime_error);
}
