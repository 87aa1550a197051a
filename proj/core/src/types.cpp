#include "anomdiff/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace anomdiff {

DiffusionState diffusion_state_from_int(int code) {
  if (code < 0 || code >= kNumDiffusionStates) {
    throw std::invalid_argument("diffusion state code out of range: " + std::to_string(code));
  }
  return static_cast<DiffusionState>(code);
}

DiffusionParams::DiffusionParams(double alpha_in, double k_in) {
  if (std::isnan(alpha_in) || std::isnan(k_in)) {
    throw std::invalid_argument("DiffusionParams: NaN input");
  }
  alpha = std::clamp(alpha_in, kMinAlpha, kMaxAlpha);
  k = std::max(k_in, 0.0);
  if (!std::isfinite(k)) {
    throw std::invalid_argument("DiffusionParams: k must be finite");
  }
}

void Trajectory::check_valid() const {
  if (points.empty()) {
    throw std::invalid_argument("Trajectory " + std::to_string(id) + ": no points");
  }
  if (start_frame < 0) {
    throw std::invalid_argument("Trajectory " + std::to_string(id) + ": negative start frame");
  }
  for (const Point& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("Trajectory " + std::to_string(id) + ": non-finite coordinate");
    }
  }
}

void ParamTrack::check_valid() const {
  const auto n = alpha_t.size();
  if (k_t.size() != n || state_t.size() != n) {
    throw std::invalid_argument("ParamTrack " + std::to_string(traj_id) + ": sequence length mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(alpha_t[i] > 0.0) || alpha_t[i] > 2.0 || !std::isfinite(alpha_t[i])) {
      throw std::invalid_argument("ParamTrack " + std::to_string(traj_id) + ": alpha out of (0,2] at frame " +
                                  std::to_string(i));
    }
    if (k_t[i] < 0.0 || !std::isfinite(k_t[i])) {
      throw std::invalid_argument("ParamTrack " + std::to_string(traj_id) + ": k < 0 at frame " +
                                  std::to_string(i));
    }
  }
}

void SegmentedTrajectory::check_valid() const {
  if (segments.empty()) {
    throw std::invalid_argument("SegmentedTrajectory: no segments");
  }
  int cursor = 0;
  for (const Segment& s : segments) {
    if (s.start != cursor || s.end <= s.start) {
      throw std::invalid_argument("SegmentedTrajectory: segments do not partition [0, n)");
    }
    cursor = s.end;
  }
  if (cursor != length) {
    throw std::invalid_argument("SegmentedTrajectory: segments do not cover [0, n)");
  }
}

std::vector<int> SegmentedTrajectory::changepoints() const {
  std::vector<int> cps;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    cps.push_back(segments[i].start);
  }
  return cps;
}

FovTensor::FovTensor()
    : data_(static_cast<std::size_t>(kRows) * kFrames * kAxes, 0.0) {
  row_start.fill(0);
  row_len.fill(0);
  traj_id.fill(-1);
}

std::vector<FovTensorViolation> validate_fov_tensor(const FovTensor& t) {
  constexpr std::size_t kMaxViolations = 32;
  std::vector<FovTensorViolation> out;
  auto report = [&](int row, int frame, std::string msg) {
    if (out.size() < kMaxViolations) {
      out.push_back({row, frame, std::move(msg)});
    }
  };

  for (int r = 0; r < FovTensor::kRows; ++r) {
    if (!t.occupancy[r]) {
      int bad = -1;
      for (int f = 0; f < FovTensor::kFrames && bad < 0; ++f) {
        if (t.at(r, f, 0) != 0.0 || t.at(r, f, 1) != 0.0) bad = f;
      }
      if (bad >= 0) {
        report(r, bad, "nonzero data in unoccupied row");
      }
      continue;
    }
    const int start = t.row_start[r];
    const int len = t.row_len[r];
    if (len <= 0 || start < 0 || start + len > FovTensor::kFrames) {
      report(r, start, "occupied row has invalid [start, start+len) extent");
      continue;
    }
    for (int f = 0; f < FovTensor::kFrames; ++f) {
      const bool inside = f >= start && f < start + len;
      const double x = t.at(r, f, 0);
      const double y = t.at(r, f, 1);
      if (!std::isfinite(x) || !std::isfinite(y)) {
        report(r, f, "non-finite value");
      } else if (!inside && (x != 0.0 || y != 0.0)) {
        report(r, f, "nonzero padding outside trajectory extent");
      }
    }
  }
  return out;
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SSM: return "ssm";
    case ModelKind::MSM: return "msm";
    case ModelKind::DIM: return "dim";
    case ModelKind::TCM: return "tcm";
    case ModelKind::QTM: return "qtm";
  }
  return "ssm";
}

ModelKind model_kind_from_string(const std::string& name) {
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "ssm") return ModelKind::SSM;
  if (lower == "msm") return ModelKind::MSM;
  if (lower == "dim") return ModelKind::DIM;
  if (lower == "tcm") return ModelKind::TCM;
  if (lower == "qtm") return ModelKind::QTM;
  throw std::invalid_argument("unknown model kind: " + name);
}

void ExperimentGroundTruth::check_valid() const {
  if (truth_tracks.size() != trajectories.size() || changepoints.size() != trajectories.size()) {
    throw std::invalid_argument("ExperimentGroundTruth: per-trajectory lists differ in size");
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    trajectories[i].check_valid();
    truth_tracks[i].check_valid();
    if (truth_tracks[i].length() != trajectories[i].length()) {
      throw std::invalid_argument("ExperimentGroundTruth: truth track length mismatch for trajectory " +
                                  std::to_string(trajectories[i].id));
    }
    for (int cp : changepoints[i]) {
      if (cp <= 0 || cp >= trajectories[i].length()) {
        throw std::invalid_argument("ExperimentGroundTruth: changepoint outside (0, length)");
      }
    }
  }
}

std::vector<int> changepoints_from_track(const ParamTrack& track) {
  std::vector<int> cps;
  for (int t = 1; t < track.length(); ++t) {
    if (track.alpha_t[t] != track.alpha_t[t - 1] || track.k_t[t] != track.k_t[t - 1] ||
        track.state_t[t] != track.state_t[t - 1]) {
      cps.push_back(t);
    }
  }
  return cps;
}

}  // namespace anomdiff
