#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "anomdiff/link.hpp"
#include "anomdiff/render.hpp"
#include "anomdiff/rng.hpp"
#include "anomdiff/simulate.hpp"
#include "doctest.h"

using namespace anomdiff;

namespace {

// Exhaustive minimum over all maximal pairings (for small matrices):
// maximize match count, then minimize cost. Recursion over rows.
void brute_force(const std::vector<std::vector<double>>& cost, std::size_t row,
                 std::vector<bool>& used, int matched, double acc, int& best_matched,
                 double& best_cost) {
  const std::size_t rows = cost.size();
  const std::size_t cols = cost.empty() ? 0 : cost[0].size();
  if (row == rows) {
    if (matched > best_matched || (matched == best_matched && acc < best_cost)) {
      best_matched = matched;
      best_cost = acc;
    }
    return;
  }
  brute_force(cost, row + 1, used, matched, acc, best_matched, best_cost);  // row unassigned
  for (std::size_t c = 0; c < cols; ++c) {
    if (!used[c] && cost[row][c] != kForbidden) {
      used[c] = true;
      brute_force(cost, row + 1, used, matched + 1, acc + cost[row][c], best_matched, best_cost);
      used[c] = false;
    }
  }
}

std::pair<int, double> oracle_assignment(const std::vector<std::vector<double>>& cost) {
  std::vector<bool> used(cost.empty() ? 0 : cost[0].size(), false);
  int best_matched = -1;
  double best_cost = 0.0;
  brute_force(cost, 0, used, 0, 0.0, best_matched, best_cost);
  return {best_matched, best_cost};
}

}  // namespace

TEST_CASE("assignment: two-by-two fixture") {
  Assignment a = solve_assignment({{1, 2}, {3, 0}});
  CHECK(a.row_to_col == std::vector<int>{0, 1});
  CHECK(a.total_cost == 1.0);
}

TEST_CASE("assignment: zero diagonal picks the diagonal") {
  Assignment a = solve_assignment({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  CHECK(a.row_to_col == std::vector<int>{0, 1, 2});
  CHECK(a.total_cost == 0.0);
}

TEST_CASE("assignment: random 4x4 equals the permutation oracle") {
  Rng rng(11);
  std::vector<std::vector<double>> cost(4, std::vector<double>(4));
  for (auto& row : cost) {
    for (double& v : row) v = static_cast<double>(rng.uniform_index(100));
  }
  auto [matched, best] = oracle_assignment(cost);
  Assignment a = solve_assignment(cost);
  CHECK(matched == 4);
  CHECK(a.total_cost == best);
}

TEST_CASE("assignment: random rectangular instances with forbidden pairs match the oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t rows = 1 + rng.uniform_index(5);
    const std::size_t cols = 1 + rng.uniform_index(5);
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
    for (auto& row : cost) {
      for (double& v : row) {
        v = rng.uniform() < 0.25 ? kForbidden : static_cast<double>(rng.uniform_index(50));
      }
    }
    auto [matched, best] = oracle_assignment(cost);
    Assignment a = solve_assignment(cost);
    int got_matched = 0;
    double got_cost = 0.0;
    std::set<int> cols_used;
    for (std::size_t r = 0; r < rows; ++r) {
      const int c = a.row_to_col[r];
      if (c < 0) continue;
      REQUIRE(cost[r][static_cast<std::size_t>(c)] != kForbidden);
      REQUIRE(cols_used.insert(c).second);
      ++got_matched;
      got_cost += cost[r][static_cast<std::size_t>(c)];
    }
    REQUIRE(got_matched == matched);
    REQUIRE(got_cost == best);
    REQUIRE(a.total_cost == best);
  }
}

TEST_CASE("assignment: require_complete rejects starved rows") {
  std::vector<std::vector<double>> cost = {{kForbidden, kForbidden}, {1, 2}};
  CHECK_NOTHROW(solve_assignment(cost));
  CHECK_THROWS_AS(solve_assignment(cost, true), std::runtime_error);
}

TEST_CASE("assignment: rejects ragged and non-finite input") {
  CHECK_THROWS_AS(solve_assignment({{1, 2}, {3}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_assignment({{std::nan("")}}), std::invalid_argument);
}

TEST_CASE("link: single drifting particle forms one trajectory") {
  std::vector<Detection> dets;
  for (int f = 0; f < 20; ++f) dets.push_back({f, 10.0 + f, 5.0, 100.0});
  auto trajs = link(dets, LinkConfig{});
  REQUIRE(trajs.size() == 1);
  CHECK(trajs[0].id == 0);
  CHECK(trajs[0].start_frame == 0);
  CHECK(trajs[0].length() == 20);
  CHECK(trajs[0].points[7].x == 17.0);
}

TEST_CASE("link: distant parallel particles never swap") {
  std::vector<Detection> dets;
  for (int f = 0; f < 30; ++f) {
    dets.push_back({f, 10.0 + 0.5 * f, 10.0, 100.0});
    dets.push_back({f, 10.0 + 0.5 * f, 90.0, 100.0});
  }
  auto trajs = link(dets, LinkConfig{});
  REQUIRE(trajs.size() == 2);
  for (const auto& t : trajs) {
    REQUIRE(t.length() == 30);
    const double y0 = t.points[0].y;
    for (const Point& p : t.points) CHECK(p.y == y0);
  }
}

TEST_CASE("link: gap splits a trajectory when memory is zero") {
  std::vector<Detection> dets;
  for (int f = 0; f < 10; ++f) {
    if (f == 5) continue;
    dets.push_back({f, 20.0, 20.0, 100.0});
  }
  auto trajs = link(dets, LinkConfig{});
  REQUIRE(trajs.size() == 2);
  CHECK(trajs[0].start_frame == 0);
  CHECK(trajs[0].length() == 5);
  CHECK(trajs[1].start_frame == 6);
  CHECK(trajs[1].length() == 4);
}

TEST_CASE("link: memory bridges a gap with interpolation") {
  std::vector<Detection> dets;
  for (int f = 0; f < 10; ++f) {
    if (f == 5) continue;
    dets.push_back({f, 20.0 + 2.0 * f, 20.0, 100.0});
  }
  LinkConfig cfg;
  cfg.memory = 1;
  auto trajs = link(dets, cfg);
  REQUIRE(trajs.size() == 1);
  CHECK(trajs[0].length() == 10);
  CHECK(trajs[0].points[5].x == doctest::Approx(30.0));  // midpoint of 28 and 32
}

TEST_CASE("link: new trajectory ids follow order of first appearance") {
  std::vector<Detection> dets;
  dets.push_back({0, 10.0, 10.0, 1.0});
  dets.push_back({1, 10.0, 10.0, 1.0});
  dets.push_back({1, 100.0, 100.0, 1.0});  // appears later, must get id 1
  dets.push_back({2, 10.0, 10.0, 1.0});
  dets.push_back({2, 100.0, 100.0, 1.0});
  auto trajs = link(dets, LinkConfig{});
  REQUIRE(trajs.size() == 2);
  CHECK(trajs[0].id == 0);
  CHECK(trajs[0].points[0].x == 10.0);
  CHECK(trajs[1].id == 1);
  CHECK(trajs[1].start_frame == 1);
  CHECK(trajs[1].points[0].x == 100.0);
}

TEST_CASE("link: unsorted detections rejected") {
  std::vector<Detection> dets = {{1, 0, 0, 1}, {0, 0, 0, 1}};
  CHECK_THROWS_AS(link(dets, LinkConfig{}), std::invalid_argument);
}

TEST_CASE("link: recovers the simulated partition from noiseless detections") {
  SimConfig cfg;
  cfg.model_kind = ModelKind::SSM;
  cfg.mean_particles = 10;
  cfg.seed = 21;
  auto exp = simulate_experiment(cfg);
  REQUIRE(!exp.trajectories.empty());

  std::vector<Detection> dets;
  for (const auto& t : exp.trajectories) {
    for (int i = 0; i < t.length(); ++i) {
      dets.push_back({t.start_frame + i, t.points[i].x, t.points[i].y, 1.0});
    }
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.frame < b.frame; });

  LinkConfig lc;
  lc.search_range = 8.0;
  auto linked = link(dets, lc);
  REQUIRE(linked.size() == exp.trajectories.size());

  // match by starting point; every linked trajectory must replay one truth
  // trajectory exactly
  std::map<std::pair<double, double>, const Trajectory*> by_start;
  for (const auto& t : exp.trajectories) by_start[{t.points[0].x, t.points[0].y}] = &t;
  for (const auto& t : linked) {
    auto it = by_start.find({t.points[0].x, t.points[0].y});
    REQUIRE(it != by_start.end());
    const Trajectory& truth = *it->second;
    REQUIRE(t.length() == truth.length());
    for (int i = 0; i < t.length(); ++i) {
      REQUIRE(t.points[i].x == truth.points[i].x);
      REQUIRE(t.points[i].y == truth.points[i].y);
    }
  }
}

TEST_CASE("vip: label frame parsing and centroid") {
  GrayImage img;
  img.width = 8;
  img.height = 8;
  img.pixels.assign(64, 0);
  img.at(2, 2) = 1;
  img.at(2, 3) = 1;
  img.at(3, 2) = 1;
  img.at(3, 3) = 1;
  img.at(6, 6) = 2;
  VipLabelFrame vip = VipLabelFrame::from_image(img);
  REQUIRE(vip.regions.size() == 2);
  CHECK(vip.centroid(1).x == doctest::Approx(2.5));
  CHECK(vip.centroid(1).y == doctest::Approx(2.5));
  CHECK(vip.centroid(2).x == doctest::Approx(6.0));
}

TEST_CASE("vip: single label maps to the nearest trajectory") {
  GrayImage img;
  img.width = 16;
  img.height = 16;
  img.pixels.assign(256, 0);
  img.at(5, 5) = 1;
  VipLabelFrame vip = VipLabelFrame::from_image(img);

  std::vector<Trajectory> trajs(2);
  trajs[0].id = 4;
  trajs[0].points = {{5.0, 5.0}};
  trajs[1].id = 9;
  trajs[1].points = {{12.0, 12.0}};
  VipMatch m = match_vips(vip, trajs);
  CHECK(m.unmatched_labels.empty());
  REQUIRE(m.label_to_traj.count(1) == 1);
  CHECK(m.label_to_traj[1] == 4);
}

TEST_CASE("vip: crossed distances resolved globally, not greedily") {
  GrayImage img;
  img.width = 32;
  img.height = 32;
  img.pixels.assign(32 * 32, 0);
  img.at(10, 4) = 1;
  img.at(10, 5) = 2;
  VipLabelFrame vip = VipLabelFrame::from_image(img);

  // label 1's nearest trajectory is (5, 10), but handing it to label 2
  // (total 0 + 4) beats the greedy split (1 + 5)
  std::vector<Trajectory> trajs(2);
  trajs[0].id = 0;
  trajs[0].points = {{5.0, 10.0}};
  trajs[1].id = 1;
  trajs[1].points = {{0.0, 10.0}};
  VipMatch m = match_vips(vip, trajs);
  CHECK(m.label_to_traj[1] == 1);
  CHECK(m.label_to_traj[2] == 0);
}

TEST_CASE("vip: fifteen labels all map") {
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 20; ++i) {
    Trajectory t;
    t.id = i;
    t.points = {{8.0 * (i % 5) + 10.0, 8.0 * (i / 5) + 10.0}};
    trajs.push_back(t);
  }
  auto vips = select_vips(trajs, 15);
  GrayImage frame = render_vip_frame(trajs, vips, 64);
  VipLabelFrame vip = VipLabelFrame::from_image(frame);
  REQUIRE(vip.regions.size() == 15);
  VipMatch m = match_vips(vip, trajs);
  CHECK(m.unmatched_labels.empty());
  CHECK(m.label_to_traj.size() == 15);
  for (int l = 1; l <= 15; ++l) {
    REQUIRE(m.label_to_traj.count(l) == 1);
    CHECK(m.label_to_traj[l] == vips[l - 1]);
  }
}

TEST_CASE("vip: surplus labels reported unmatched") {
  GrayImage img;
  img.width = 16;
  img.height = 16;
  img.pixels.assign(256, 0);
  img.at(3, 3) = 1;
  img.at(12, 12) = 2;
  VipLabelFrame vip = VipLabelFrame::from_image(img);
  std::vector<Trajectory> trajs(1);
  trajs[0].id = 0;
  trajs[0].points = {{3.0, 3.0}};
  VipMatch m = match_vips(vip, trajs);
  CHECK(m.label_to_traj.size() == 1);
  REQUIRE(m.unmatched_labels.size() == 1);
  CHECK(m.unmatched_labels[0] == 2);
}
