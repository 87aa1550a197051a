#include "anomdiff/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace anomdiff {

namespace {

constexpr int kMaxParticles = 10000;

// Stream ids for Rng::split; particle-indexed streams start at the bases.
constexpr std::uint64_t kStreamPlacement = 1;
constexpr std::uint64_t kStreamGeometry = 2;
constexpr std::uint64_t kStreamEvents = 3;
constexpr std::uint64_t kStreamMotionBase = 1000;
constexpr std::uint64_t kStreamRegimeBase = 2000000;

double truncated_normal(Rng& rng, double mean, double sigma, double lo, double hi) {
  for (;;) {
    const double v = mean + sigma * rng.normal();
    if (v > lo && v <= hi) return v;
  }
}

// Fold a coordinate into [0, size] by mirroring.
double reflect_into(double x, double size) {
  if (size <= 0.0) return 0.0;
  const double period = 2.0 * size;
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  return r <= size ? r : period - r;
}

DiffusionState mobile_state(double alpha, double threshold) {
  return alpha > threshold ? DiffusionState::Directed : DiffusionState::Free;
}

struct Circle {
  double x, y, r;
  bool contains(double px, double py) const {
    const double dx = px - x, dy = py - y;
    return dx * dx + dy * dy <= r * r;
  }
};

std::vector<Circle> place_circles(int count, double radius, double field, Rng& rng) {
  // Fully inside the field so reflecting walls cannot eject an occupant, and
  // pairwise disjoint so an interior point names exactly one circle.
  std::vector<Circle> out;
  out.reserve(static_cast<std::size_t>(count));
  const double lo = radius;
  const double hi = std::max(radius, field - radius);
  const double min_gap = 2.0 * radius + 0.5;
  constexpr int kMaxAttempts = 20000;
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const double x = lo + (hi - lo) * rng.uniform();
      const double y = lo + (hi - lo) * rng.uniform();
      bool clear = true;
      for (const Circle& c : out) {
        const double dx = x - c.x, dy = y - c.y;
        if (dx * dx + dy * dy < min_gap * min_gap) {
          clear = false;
          break;
        }
      }
      if (clear) {
        out.push_back({x, y, radius});
        placed = true;
      }
    }
    if (!placed) {
      throw std::invalid_argument("place_circles: field too crowded for " + std::to_string(count) +
                                  " disjoint circles of radius " + std::to_string(radius));
    }
  }
  return out;
}

int circle_index_at(const std::vector<Circle>& circles, double x, double y) {
  for (std::size_t i = 0; i < circles.size(); ++i) {
    if (circles[i].contains(x, y)) return static_cast<int>(i);
  }
  return -1;
}

struct ParticleDraw {
  DiffusionParams params;
  Point start;
};

std::vector<ParticleDraw> draw_particles(const SimConfig& cfg, Rng& placement, Rng& param_rng) {
  int n = static_cast<int>(placement.poisson(cfg.mean_particles));
  n = std::min(n, kMaxParticles);
  std::vector<ParticleDraw> out(static_cast<std::size_t>(n));
  const double field = static_cast<double>(cfg.field_size);
  for (auto& p : out) {
    p.params = sample_parameters(cfg.model_kind, param_rng, cfg.sigma_alpha, cfg.sigma_k);
    p.start = {field * placement.uniform(), field * placement.uniform()};
  }
  return out;
}

ParamTrack make_track(int traj_id, int n_frames) {
  ParamTrack t;
  t.traj_id = traj_id;
  t.alpha_t.assign(static_cast<std::size_t>(n_frames), 1.0);
  t.k_t.assign(static_cast<std::size_t>(n_frames), 0.0);
  t.state_t.assign(static_cast<std::size_t>(n_frames), DiffusionState::Free);
  return t;
}

void fill_truth(ParamTrack& track, int frame, double alpha, double k, DiffusionState s) {
  track.alpha_t[static_cast<std::size_t>(frame)] = alpha;
  track.k_t[static_cast<std::size_t>(frame)] = k;
  track.state_t[static_cast<std::size_t>(frame)] = s;
}

// SSM and MSM share the regime-sequence path: the per-frame (alpha, K) is
// known upfront, so displacements are exact fGn per constant-regime run.
// Step i -> i+1 follows the regime at frame i.
Displacements displacements_for_regimes(const std::vector<DiffusionParams>& regime_by_frame,
                                        Rng& motion) {
  const int n_steps = static_cast<int>(regime_by_frame.size()) - 1;
  Displacements d;
  d.dx.reserve(static_cast<std::size_t>(n_steps));
  d.dy.reserve(static_cast<std::size_t>(n_steps));
  int run_start = 0;
  while (run_start < n_steps) {
    const auto& cur = regime_by_frame[static_cast<std::size_t>(run_start)];
    int run_end = run_start + 1;
    while (run_end < n_steps && regime_by_frame[static_cast<std::size_t>(run_end)].alpha == cur.alpha &&
           regime_by_frame[static_cast<std::size_t>(run_end)].k == cur.k) {
      ++run_end;
    }
    Displacements seg = sample_fbm_displacements(run_end - run_start, cur, motion);
    d.dx.insert(d.dx.end(), seg.dx.begin(), seg.dx.end());
    d.dy.insert(d.dy.end(), seg.dy.begin(), seg.dy.end());
    run_start = run_end;
  }
  return d;
}

void simulate_regime_models(const SimConfig& cfg, const std::vector<ParticleDraw>& draws,
                            Rng& master, ExperimentGroundTruth& out) {
  const int n = cfg.n_frames;
  const double field = static_cast<double>(cfg.field_size);
  for (std::size_t i = 0; i < draws.size(); ++i) {
    Rng motion = master.split(kStreamMotionBase + i);
    Rng regime_rng = master.split(kStreamRegimeBase + i);

    std::vector<DiffusionParams> regimes;
    std::vector<DiffusionParams> regime_by_frame(static_cast<std::size_t>(n));
    if (cfg.model_kind == ModelKind::SSM) {
      regime_by_frame.assign(static_cast<std::size_t>(n), draws[i].params);
    } else {
      const int m = std::max(1, cfg.msm.n_states);
      regimes.push_back(draws[i].params);
      for (int s = 1; s < m; ++s) {
        regimes.push_back(sample_parameters(cfg.model_kind, regime_rng, cfg.sigma_alpha, cfg.sigma_k));
      }
      const double p_leave = m > 1 ? 1.0 / std::max(1.0, cfg.msm.mean_dwell) : 0.0;
      int state = static_cast<int>(regime_rng.uniform() * m);
      state = std::min(state, m - 1);
      for (int t = 0; t < n; ++t) {
        regime_by_frame[static_cast<std::size_t>(t)] = regimes[static_cast<std::size_t>(state)];
        if (regime_rng.uniform() < p_leave) {
          // Dirichlet(1) over the other states reduces to a uniform pick.
          int next = static_cast<int>(regime_rng.uniform() * (m - 1));
          next = std::min(next, m - 2);
          state = next >= state ? next + 1 : next;
        }
      }
    }

    Displacements disp = displacements_for_regimes(regime_by_frame, motion);

    Trajectory traj;
    traj.id = static_cast<int>(i);
    ParamTrack track = make_track(traj.id, n);
    double x = draws[i].start.x, y = draws[i].start.y;
    for (int t = 0; t < n; ++t) {
      if (t > 0) {
        x = reflect_into(x + disp.dx[static_cast<std::size_t>(t - 1)], field);
        y = reflect_into(y + disp.dy[static_cast<std::size_t>(t - 1)], field);
      }
      traj.points.push_back({x, y});
      const auto& r = regime_by_frame[static_cast<std::size_t>(t)];
      fill_truth(track, t, r.alpha, r.k, mobile_state(r.alpha, cfg.directed_alpha_threshold));
    }
    out.trajectories.push_back(std::move(traj));
    out.truth_tracks.push_back(std::move(track));
  }
}

// Position-coupled models (DIM, TCM, QTM): each particle carries a
// pre-generated base-fGn displacement sequence; per-frame events rescale,
// zero, or substitute steps.
void simulate_coupled_models(const SimConfig& cfg, const std::vector<ParticleDraw>& draws,
                             Rng& master, ExperimentGroundTruth& out) {
  const int n = cfg.n_frames;
  const int np = static_cast<int>(draws.size());
  const double field = static_cast<double>(cfg.field_size);
  Rng geometry = master.split(kStreamGeometry);
  Rng events = master.split(kStreamEvents);

  std::vector<Circle> compartments, traps;
  if (cfg.model_kind == ModelKind::TCM) {
    compartments = place_circles(cfg.tcm.n_compartments, cfg.tcm.radius, field, geometry);
  } else if (cfg.model_kind == ModelKind::QTM) {
    traps = place_circles(cfg.qtm.n_traps, cfg.qtm.radius, field, geometry);
  }

  std::vector<Displacements> disp(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) {
    Rng motion = master.split(kStreamMotionBase + static_cast<std::uint64_t>(i));
    disp[static_cast<std::size_t>(i)] =
        sample_fbm_displacements(std::max(1, n - 1), draws[static_cast<std::size_t>(i)].params, motion);
  }

  std::vector<double> xs(static_cast<std::size_t>(np)), ys(static_cast<std::size_t>(np));
  std::vector<int> bound_to(static_cast<std::size_t>(np), -1);  // DIM partner index
  std::vector<bool> trapped(static_cast<std::size_t>(np), false);
  std::vector<int> compartment_of(static_cast<std::size_t>(np), -1);

  out.trajectories.resize(static_cast<std::size_t>(np));
  out.truth_tracks.resize(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) {
    out.trajectories[static_cast<std::size_t>(i)].id = i;
    out.truth_tracks[static_cast<std::size_t>(i)] = make_track(i, n);
    xs[static_cast<std::size_t>(i)] = draws[static_cast<std::size_t>(i)].start.x;
    ys[static_cast<std::size_t>(i)] = draws[static_cast<std::size_t>(i)].start.y;
    if (cfg.model_kind == ModelKind::TCM) {
      compartment_of[static_cast<std::size_t>(i)] =
          circle_index_at(compartments, xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)]);
    }
  }

  auto record = [&](int i, int t) {
    const auto& base = draws[static_cast<std::size_t>(i)].params;
    out.trajectories[static_cast<std::size_t>(i)].points.push_back(
        {xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)]});
    double alpha = base.alpha, k = base.k;
    DiffusionState s = mobile_state(alpha, cfg.directed_alpha_threshold);
    if (cfg.model_kind == ModelKind::QTM && trapped[static_cast<std::size_t>(i)]) {
      k = 0.0;
      s = DiffusionState::Immobile;
    } else if (cfg.model_kind == ModelKind::TCM && compartment_of[static_cast<std::size_t>(i)] >= 0) {
      k = base.k * cfg.tcm.k_scale;
      s = DiffusionState::Confined;
    } else if (cfg.model_kind == ModelKind::DIM && bound_to[static_cast<std::size_t>(i)] >= 0) {
      const int j = bound_to[static_cast<std::size_t>(i)];
      const auto& slow = draws[static_cast<std::size_t>(
          draws[static_cast<std::size_t>(i)].params.k <= draws[static_cast<std::size_t>(j)].params.k ? i : j)].params;
      alpha = slow.alpha;
      k = slow.k * cfg.dim.k_scale;
      s = mobile_state(alpha, cfg.directed_alpha_threshold);
    }
    fill_truth(out.truth_tracks[static_cast<std::size_t>(i)], t, alpha, k, s);
  };

  for (int i = 0; i < np; ++i) record(i, 0);

  for (int t = 1; t < n; ++t) {
    // Move every particle; the regime in force at frame t-1 shapes the step.
    for (int i = 0; i < np; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      const double bdx = disp[ii].dx[static_cast<std::size_t>(t - 1)];
      const double bdy = disp[ii].dy[static_cast<std::size_t>(t - 1)];
      switch (cfg.model_kind) {
        case ModelKind::QTM: {
          if (trapped[ii]) {
            // Escape roll precedes the move so p_escape=1 never freezes a frame.
            if (events.uniform() < cfg.qtm.p_escape) {
              trapped[ii] = false;
            } else {
              break;
            }
          }
          const double px = xs[ii], py = ys[ii];
          double qx = reflect_into(px + bdx, field);
          double qy = reflect_into(py + bdy, field);
          const int before = circle_index_at(traps, px, py);
          const int after = circle_index_at(traps, qx, qy);
          xs[ii] = qx;
          ys[ii] = qy;
          if (before < 0 && after >= 0 && events.uniform() >= cfg.qtm.p_escape) {
            trapped[ii] = true;
          }
          break;
        }
        case ModelKind::TCM: {
          const int inside = compartment_of[ii];
          const double scale = inside >= 0 ? std::sqrt(cfg.tcm.k_scale) : 1.0;
          double qx = xs[ii] + bdx * scale;
          double qy = ys[ii] + bdy * scale;
          if (inside >= 0) {
            const Circle& c = compartments[static_cast<std::size_t>(inside)];
            const double dx = qx - c.x, dy = qy - c.y;
            const double r = std::sqrt(dx * dx + dy * dy);
            if (r > c.r) {
              if (events.uniform() < cfg.tcm.transmittance) {
                // Escape frees the particle for at least one frame; a later
                // step can bind it again through the unbound branch.
                compartment_of[ii] = -1;
              } else {
                // Radial mirror about the boundary, clamped inside.
                const double rr = std::clamp(2.0 * c.r - r, 0.0, c.r);
                const double f = r > 0.0 ? rr / r : 0.0;
                qx = c.x + dx * f;
                qy = c.y + dy * f;
              }
            }
          } else {
            compartment_of[ii] = circle_index_at(compartments, qx, qy);
          }
          xs[ii] = reflect_into(qx, field);
          ys[ii] = reflect_into(qy, field);
          break;
        }
        case ModelKind::DIM: {
          double sdx = bdx, sdy = bdy;
          const int j = bound_to[ii];
          if (j >= 0) {
            const int slow = draws[ii].params.k <= draws[static_cast<std::size_t>(j)].params.k ? i : j;
            const double f = std::sqrt(cfg.dim.k_scale);
            sdx = disp[static_cast<std::size_t>(slow)].dx[static_cast<std::size_t>(t - 1)] * f;
            sdy = disp[static_cast<std::size_t>(slow)].dy[static_cast<std::size_t>(t - 1)] * f;
          }
          xs[ii] = reflect_into(xs[ii] + sdx, field);
          ys[ii] = reflect_into(ys[ii] + sdy, field);
          break;
        }
        default: {
          xs[ii] = reflect_into(xs[ii] + bdx, field);
          ys[ii] = reflect_into(ys[ii] + bdy, field);
          break;
        }
      }
    }

    if (cfg.model_kind == ModelKind::DIM) {
      // Unbind rolls first, then new contacts, in deterministic index order.
      for (int i = 0; i < np; ++i) {
        const int j = bound_to[static_cast<std::size_t>(i)];
        if (j > i && events.uniform() < cfg.dim.p_unbind) {
          bound_to[static_cast<std::size_t>(i)] = -1;
          bound_to[static_cast<std::size_t>(j)] = -1;
        }
      }
      const double r2 = cfg.dim.r_bind * cfg.dim.r_bind;
      for (int i = 0; i < np; ++i) {
        if (bound_to[static_cast<std::size_t>(i)] >= 0) continue;
        for (int j = i + 1; j < np; ++j) {
          if (bound_to[static_cast<std::size_t>(j)] >= 0) continue;
          const double dx = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
          const double dy = ys[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(j)];
          if (dx * dx + dy * dy <= r2 && events.uniform() < cfg.dim.p_bind) {
            bound_to[static_cast<std::size_t>(i)] = j;
            bound_to[static_cast<std::size_t>(j)] = i;
            break;
          }
        }
      }
    }

    for (int i = 0; i < np; ++i) record(i, t);
  }
}

}  // namespace

void SimConfig::check_valid() const {
  if (fov_size <= 0 || field_size <= 0 || fov_size > field_size) {
    throw std::invalid_argument("SimConfig: fov_size must be in (0, field_size]");
  }
  if (n_frames < 2) throw std::invalid_argument("SimConfig: n_frames must be >= 2");
  if (!(mean_particles > 0.0) || mean_particles > static_cast<double>(kMaxParticles)) {
    throw std::invalid_argument("SimConfig: mean_particles must be in (0, 1e4]");
  }
  if (max_particles_per_fov != FovTensor::kRows) {
    throw std::invalid_argument("SimConfig: max_particles_per_fov must be 64");
  }
  if (sigma_alpha <= 0.0 || sigma_k <= 0.0) {
    throw std::invalid_argument("SimConfig: parameter sigmas must be positive");
  }
  if (msm.n_states < 1 || msm.mean_dwell <= 0.0) {
    throw std::invalid_argument("SimConfig: msm needs n_states >= 1, mean_dwell > 0");
  }
  if (dim.r_bind <= 0.0 || dim.p_bind < 0.0 || dim.p_bind > 1.0 || dim.p_unbind < 0.0 ||
      dim.p_unbind > 1.0 || dim.k_scale <= 0.0) {
    throw std::invalid_argument("SimConfig: dim parameters out of range");
  }
  if (tcm.n_compartments < 0 || tcm.radius <= 0.0 || tcm.transmittance < 0.0 ||
      tcm.transmittance > 1.0 || tcm.k_scale <= 0.0) {
    throw std::invalid_argument("SimConfig: tcm parameters out of range");
  }
  if (qtm.n_traps < 0 || qtm.radius <= 0.0 || qtm.p_escape < 0.0 || qtm.p_escape > 1.0) {
    throw std::invalid_argument("SimConfig: qtm parameters out of range");
  }
}

DiffusionParams sample_parameters(ModelKind kind, Rng& rng, double sigma_alpha, double sigma_k) {
  const double alpha = truncated_normal(rng, 1.0, sigma_alpha, 0.0, 2.0);
  double k;
  if (kind == ModelKind::SSM) {
    k = 1e-4 + (4.0 - 1e-4) * rng.uniform();
  } else {
    for (;;) {
      k = 1.0 + sigma_k * rng.normal();
      if (k > 0.0) break;
    }
  }
  return DiffusionParams(alpha, k);
}

ExperimentGroundTruth simulate_experiment(const SimConfig& cfg) {
  cfg.check_valid();
  Rng master(cfg.seed);
  Rng placement = master.split(kStreamPlacement);
  Rng param_rng = master.split(kStreamPlacement + 100);
  const std::vector<ParticleDraw> draws = draw_particles(cfg, placement, param_rng);

  ExperimentGroundTruth out;
  out.model_kind = cfg.model_kind;
  if (cfg.model_kind == ModelKind::SSM || cfg.model_kind == ModelKind::MSM) {
    simulate_regime_models(cfg, draws, master, out);
  } else {
    simulate_coupled_models(cfg, draws, master, out);
  }
  out.changepoints.reserve(out.truth_tracks.size());
  for (const auto& track : out.truth_tracks) {
    out.changepoints.push_back(changepoints_from_track(track));
  }
  out.check_valid();
  return out;
}

std::vector<FovExperiment> extract_fovs(const ExperimentGroundTruth& experiment,
                                        const SimConfig& cfg) {
  cfg.check_valid();
  const int per_side = cfg.field_size / cfg.fov_size;
  std::vector<FovExperiment> fovs;
  fovs.reserve(static_cast<std::size_t>(per_side * per_side));
  for (int gy = 0; gy < per_side; ++gy) {
    for (int gx = 0; gx < per_side; ++gx) {
      FovExperiment f;
      f.fov_id = gy * per_side + gx;
      f.origin_x = static_cast<double>(gx * cfg.fov_size);
      f.origin_y = static_cast<double>(gy * cfg.fov_size);
      fovs.push_back(std::move(f));
    }
  }

  const double size = static_cast<double>(cfg.fov_size);
  for (std::size_t ti = 0; ti < experiment.trajectories.size(); ++ti) {
    const Trajectory& traj = experiment.trajectories[ti];
    const ParamTrack& track = experiment.truth_tracks[ti];
    for (auto& f : fovs) {
      int run_start = -1;
      auto flush = [&](int end_frame) {
        if (run_start < 0) return;
        Trajectory clip;
        clip.id = static_cast<int>(f.trajectories.size());
        clip.fov_id = f.fov_id;
        clip.start_frame = traj.start_frame + run_start;
        ParamTrack clip_track;
        clip_track.traj_id = clip.id;
        for (int t = run_start; t < end_frame; ++t) {
          const Point& p = traj.points[static_cast<std::size_t>(t)];
          clip.points.push_back({p.x - f.origin_x, p.y - f.origin_y});
          clip_track.alpha_t.push_back(track.alpha_t[static_cast<std::size_t>(t)]);
          clip_track.k_t.push_back(track.k_t[static_cast<std::size_t>(t)]);
          clip_track.state_t.push_back(track.state_t[static_cast<std::size_t>(t)]);
        }
        f.trajectories.push_back(std::move(clip));
        f.truth_tracks.push_back(std::move(clip_track));
        f.source_traj_ids.push_back(traj.id);
        run_start = -1;
      };
      for (int t = 0; t < traj.length(); ++t) {
        const Point& p = traj.points[static_cast<std::size_t>(t)];
        const bool inside = p.x >= f.origin_x && p.x < f.origin_x + size &&
                            p.y >= f.origin_y && p.y < f.origin_y + size;
        if (inside && run_start < 0) run_start = t;
        if (!inside) flush(t);
      }
      flush(traj.length());
    }
  }
  return fovs;
}

FovTensor to_fov_tensor(const std::vector<Trajectory>& trajectories, int fov_id) {
  if (trajectories.size() > static_cast<std::size_t>(FovTensor::kRows)) {
    throw std::invalid_argument("to_fov_tensor: more than " + std::to_string(FovTensor::kRows) +
                                " trajectories");
  }
  FovTensor tensor;
  tensor.fov_id = fov_id;
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    const Trajectory& traj = trajectories[r];
    traj.check_valid();
    if (traj.end_frame() > FovTensor::kFrames) {
      throw std::invalid_argument("to_fov_tensor: trajectory exceeds " +
                                  std::to_string(FovTensor::kFrames) + " frames");
    }
    const int row = static_cast<int>(r);
    tensor.occupancy[r] = true;
    tensor.row_start[r] = traj.start_frame;
    tensor.row_len[r] = traj.length();
    tensor.traj_id[r] = traj.id;
    for (int t = 0; t < traj.length(); ++t) {
      tensor.at(row, traj.start_frame + t, 0) = traj.points[static_cast<std::size_t>(t)].x;
      tensor.at(row, traj.start_frame + t, 1) = traj.points[static_cast<std::size_t>(t)].y;
    }
  }
  return tensor;
}

std::vector<FovTensor> to_fov_tensors(const std::vector<Trajectory>& trajectories, int fov_id) {
  std::vector<FovTensor> out;
  if (trajectories.empty()) {
    out.push_back(to_fov_tensor({}, fov_id));
    return out;
  }
  for (std::size_t at = 0; at < trajectories.size(); at += FovTensor::kRows) {
    const std::size_t end = std::min(trajectories.size(), at + FovTensor::kRows);
    std::vector<Trajectory> chunk(trajectories.begin() + static_cast<std::ptrdiff_t>(at),
                                  trajectories.begin() + static_cast<std::ptrdiff_t>(end));
    out.push_back(to_fov_tensor(chunk, fov_id));
  }
  return out;
}

}  // namespace anomdiff
