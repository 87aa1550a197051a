// Shared domain types for the anomalous-diffusion toolkit.
//
// All types here are plain values: immutable-after-construction in spirit,
// cheap to copy or move, and safe to share across threads once built.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace anomdiff {

// Motion state of a particle at one frame. Serialized as the bare integer.
enum class DiffusionState : int {
  Immobile = 0,
  Confined = 1,
  Free = 2,
  Directed = 3,
};

inline constexpr int kNumDiffusionStates = 4;

// Throws std::invalid_argument when code is outside {0,1,2,3}.
DiffusionState diffusion_state_from_int(int code);

// Anomalous-diffusion parameter pair. The exponent alpha lives in (0, 2];
// k is the generalized diffusion coefficient in length^2 / time^alpha,
// with the per-axis convention Var[x(t) - x(0)] = k * t^alpha.
//
// Construction clamps alpha to [kMinAlpha, 2] and k to [0, inf) so that
// downstream log operations are total. NaN input throws.
struct DiffusionParams {
  static constexpr double kMinAlpha = 1e-3;
  static constexpr double kMaxAlpha = 2.0;

  double alpha = 1.0;
  double k = 1.0;

  DiffusionParams() = default;
  DiffusionParams(double alpha_in, double k_in);
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Per-particle 2-D track. points[i] is the position at frame start_frame + i;
// frames are consecutive by construction. fov_id is -1 for full-field tracks.
struct Trajectory {
  int id = 0;
  int start_frame = 0;
  int fov_id = -1;
  std::vector<Point> points;

  int length() const { return static_cast<int>(points.size()); }
  int end_frame() const { return start_frame + length(); }  // exclusive

  // Throws std::invalid_argument on an invariant violation
  // (empty points, negative start frame, non-finite coordinate).
  void check_valid() const;
};

// Frame-by-frame parameter predictions (or ground truth) for one trajectory.
// All three sequences have the trajectory's length.
struct ParamTrack {
  int traj_id = 0;
  std::vector<double> alpha_t;
  std::vector<double> k_t;
  std::vector<DiffusionState> state_t;

  int length() const { return static_cast<int>(alpha_t.size()); }

  // Throws std::invalid_argument when lengths disagree or values are out of
  // range (alpha outside (0,2], k < 0, non-finite).
  void check_valid() const;
};

// Piecewise-constant span [start, end) with one parameter set and state.
struct Segment {
  int start = 0;
  int end = 0;  // exclusive
  DiffusionParams params;
  DiffusionState state = DiffusionState::Free;
};

// A trajectory reduced to abutting segments that partition [0, length).
struct SegmentedTrajectory {
  int traj_id = 0;
  int length = 0;
  std::vector<Segment> segments;

  // Throws std::invalid_argument unless segments exactly partition
  // [0, length) in order with no gaps or overlaps.
  void check_valid() const;

  // Changepoints are the interior segment boundaries, ascending.
  std::vector<int> changepoints() const;
};

// Padded trajectory tensor for one field of view: 64 rows (particles),
// 208 frames, 2 axes. Row r holds trajectory r aligned at its start frame;
// everything else is zero. Rows without occupancy are all-zero.
class FovTensor {
 public:
  static constexpr int kRows = 64;
  static constexpr int kFrames = 208;
  static constexpr int kAxes = 2;

  FovTensor();

  double& at(int row, int frame, int axis) {
    return data_[(static_cast<std::size_t>(row) * kFrames + frame) * kAxes + axis];
  }
  double at(int row, int frame, int axis) const {
    return data_[(static_cast<std::size_t>(row) * kFrames + frame) * kAxes + axis];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  int fov_id = -1;
  std::array<bool, kRows> occupancy{};
  std::array<int, kRows> row_start{};
  std::array<int, kRows> row_len{};
  std::array<int, kRows> traj_id{};

 private:
  std::vector<double> data_;  // row-major [row][frame][axis]
};

struct FovTensorViolation {
  int row = -1;
  int frame = -1;
  std::string message;
};

// Structural validation; never throws. Returns an empty list when all
// invariants hold, otherwise one entry per violation (earliest first,
// capped) with the first violating (row, frame).
std::vector<FovTensorViolation> validate_fov_tensor(const FovTensor& t);

enum class ModelKind { SSM, MSM, DIM, TCM, QTM };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Full ground truth for one simulated experiment: one truth track per
// trajectory with equal length, plus per-trajectory changepoint frames
// strictly inside (0, length).
struct ExperimentGroundTruth {
  ModelKind model_kind = ModelKind::SSM;
  std::vector<Trajectory> trajectories;
  std::vector<ParamTrack> truth_tracks;
  std::vector<std::vector<int>> changepoints;

  void check_valid() const;
};

// Changepoints of a per-frame truth triple: frames t in (0, n) where
// (alpha, k, state) differs from frame t-1.
std::vector<int> changepoints_from_track(const ParamTrack& track);

}  // namespace anomdiff
