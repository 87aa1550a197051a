#include "anomdiff/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "csv_detail.hpp"

namespace anomdiff {

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

using csvdetail::fail;
using csvdetail::for_each_row;
using csvdetail::parse_double_field;
using csvdetail::parse_int_field;

std::string to_csv(const std::vector<Trajectory>& trajs) {
  std::string out = "traj_id,frame,x,y\n";
  for (const Trajectory& t : trajs) {
    for (int i = 0; i < t.length(); ++i) {
      out += std::to_string(t.id);
      out += ',';
      out += std::to_string(t.start_frame + i);
      out += ',';
      out += format_double(t.points[i].x);
      out += ',';
      out += format_double(t.points[i].y);
      out += '\n';
    }
  }
  return out;
}

std::string to_csv(const std::vector<ParamTrack>& tracks) {
  std::string out = "traj_id,frame,alpha,k,state\n";
  for (const ParamTrack& tr : tracks) {
    for (int i = 0; i < tr.length(); ++i) {
      out += std::to_string(tr.traj_id);
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += format_double(tr.alpha_t[i]);
      out += ',';
      out += format_double(tr.k_t[i]);
      out += ',';
      out += std::to_string(static_cast<int>(tr.state_t[i]));
      out += '\n';
    }
  }
  return out;
}

std::string changepoints_to_csv(const std::vector<Trajectory>& trajs,
                                const std::vector<std::vector<int>>& changepoints) {
  std::string out = "traj_id,cp_frame\n";
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (int cp : changepoints[i]) {
      out += std::to_string(trajs[i].id);
      out += ',';
      out += std::to_string(cp);
      out += '\n';
    }
  }
  return out;
}

std::string segments_to_csv(const std::vector<SegmentedTrajectory>& segs) {
  std::string out = "traj_id,start,end,alpha,k,state\n";
  for (const SegmentedTrajectory& st : segs) {
    for (const Segment& s : st.segments) {
      out += std::to_string(st.traj_id);
      out += ',';
      out += std::to_string(s.start);
      out += ',';
      out += std::to_string(s.end);
      out += ',';
      out += format_double(s.params.alpha);
      out += ',';
      out += format_double(s.params.k);
      out += ',';
      out += std::to_string(static_cast<int>(s.state));
      out += '\n';
    }
  }
  return out;
}

std::string vip_map_to_csv(const std::map<int, int>& label_to_traj) {
  std::string out = "label,traj_id\n";
  for (const auto& [label, traj] : label_to_traj) {
    out += std::to_string(label);
    out += ',';
    out += std::to_string(traj);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<Trajectory> read_trajectories_csv(const std::string& path) {
  std::vector<Trajectory> out;
  int current_id = -1;
  int expected_frame = 0;
  for_each_row(path, "traj_id,frame,x,y", [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 4) fail(path, line, "expected 4 fields");
    const int id = static_cast<int>(parse_int_field(f[0], path, line));
    const int frame = static_cast<int>(parse_int_field(f[1], path, line));
    const double x = parse_double_field(f[2], path, line);
    const double y = parse_double_field(f[3], path, line);
    if (out.empty() || id != current_id) {
      if (frame < 0) fail(path, line, "negative frame");
      Trajectory t;
      t.id = id;
      t.start_frame = frame;
      out.push_back(std::move(t));
      current_id = id;
      expected_frame = frame;
    } else if (frame != expected_frame) {
      fail(path, line, "frames of trajectory " + std::to_string(id) + " are not consecutive");
    }
    out.back().points.push_back({x, y});
    ++expected_frame;
  });
  for (const Trajectory& t : out) t.check_valid();
  return out;
}

std::vector<ParamTrack> read_param_tracks_csv(const std::string& path) {
  std::vector<ParamTrack> out;
  int current_id = -1;
  int expected_frame = 0;
  for_each_row(path, "traj_id,frame,alpha,k,state", [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 5) fail(path, line, "expected 5 fields");
    const int id = static_cast<int>(parse_int_field(f[0], path, line));
    const int frame = static_cast<int>(parse_int_field(f[1], path, line));
    const double alpha = parse_double_field(f[2], path, line);
    const double k = parse_double_field(f[3], path, line);
    const long state_code = parse_int_field(f[4], path, line);
    if (state_code < 0 || state_code >= kNumDiffusionStates) {
      fail(path, line, "state out of range 0..3: " + std::to_string(state_code));
    }
    if (!(alpha > 0.0) || alpha > 2.0) fail(path, line, "alpha outside (0,2]");
    if (k < 0.0) fail(path, line, "negative k");
    if (out.empty() || id != current_id) {
      if (frame != 0) fail(path, line, "param track must start at frame 0");
      ParamTrack tr;
      tr.traj_id = id;
      out.push_back(std::move(tr));
      current_id = id;
      expected_frame = 0;
    } else if (frame != expected_frame) {
      fail(path, line, "frames of track " + std::to_string(id) + " are not consecutive");
    }
    out.back().alpha_t.push_back(alpha);
    out.back().k_t.push_back(k);
    out.back().state_t.push_back(static_cast<DiffusionState>(state_code));
    ++expected_frame;
  });
  return out;
}

std::map<int, std::vector<int>> read_changepoints_csv(const std::string& path) {
  std::map<int, std::vector<int>> out;
  for_each_row(path, "traj_id,cp_frame", [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 2) fail(path, line, "expected 2 fields");
    const int id = static_cast<int>(parse_int_field(f[0], path, line));
    const int cp = static_cast<int>(parse_int_field(f[1], path, line));
    if (cp <= 0) fail(path, line, "changepoint must be a positive interior frame");
    out[id].push_back(cp);
  });
  for (auto& [id, cps] : out) std::sort(cps.begin(), cps.end());
  return out;
}

std::vector<SegmentedTrajectory> read_segments_csv(const std::string& path) {
  std::vector<SegmentedTrajectory> out;
  int current_id = -1;
  for_each_row(path, "traj_id,start,end,alpha,k,state", [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 6) fail(path, line, "expected 6 fields");
    const int id = static_cast<int>(parse_int_field(f[0], path, line));
    Segment s;
    s.start = static_cast<int>(parse_int_field(f[1], path, line));
    s.end = static_cast<int>(parse_int_field(f[2], path, line));
    const double alpha = parse_double_field(f[3], path, line);
    const double k = parse_double_field(f[4], path, line);
    const long state_code = parse_int_field(f[5], path, line);
    if (state_code < 0 || state_code >= kNumDiffusionStates) {
      fail(path, line, "state out of range 0..3: " + std::to_string(state_code));
    }
    s.params = DiffusionParams(alpha, k);
    s.state = static_cast<DiffusionState>(state_code);
    if (out.empty() || id != current_id) {
      out.push_back(SegmentedTrajectory{id, 0, {}});
      current_id = id;
    }
    out.back().segments.push_back(s);
    out.back().length = s.end;
  });
  for (const SegmentedTrajectory& st : out) st.check_valid();
  return out;
}

std::map<int, int> read_vip_map_csv(const std::string& path) {
  std::map<int, int> out;
  for_each_row(path, "label,traj_id", [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 2) fail(path, line, "expected 2 fields");
    const int label = static_cast<int>(parse_int_field(f[0], path, line));
    const int traj = static_cast<int>(parse_int_field(f[1], path, line));
    if (label <= 0) fail(path, line, "labels are positive integers");
    out[label] = traj;
  });
  return out;
}

}  // namespace anomdiff
