// CSV file formats shared across the pipeline stages.
//
//   trajectories   traj_id,frame,x,y
//   param tracks   traj_id,frame,alpha,k,state
//   changepoints   traj_id,cp_frame
//   detections     frame,x,y,mass
//   segments       traj_id,start,end,alpha,k,state
//   vip map        label,traj_id
//
// UTF-8, LF line endings, floats as shortest round-trip decimals.
// Readers reject malformed rows with the offending line number.
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "anomdiff/types.hpp"

namespace anomdiff {

// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

std::string to_csv(const std::vector<Trajectory>& trajs);
std::string to_csv(const std::vector<ParamTrack>& tracks);
std::string changepoints_to_csv(const std::vector<Trajectory>& trajs,
                                const std::vector<std::vector<int>>& changepoints);
std::string segments_to_csv(const std::vector<SegmentedTrajectory>& segs);
std::string vip_map_to_csv(const std::map<int, int>& label_to_traj);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// Readers parse strictly; any violation throws std::runtime_error with
// "<path>:<line>: <reason>". Trajectories must have consecutive frames per
// id; param-track rows must align one-to-one with consecutive frames.
std::vector<Trajectory> read_trajectories_csv(const std::string& path);
std::vector<ParamTrack> read_param_tracks_csv(const std::string& path);

// Changepoint frames per traj_id (sorted ascending as stored).
std::map<int, std::vector<int>> read_changepoints_csv(const std::string& path);

std::vector<SegmentedTrajectory> read_segments_csv(const std::string& path);

std::map<int, int> read_vip_map_csv(const std::string& path);

}  // namespace anomdiff
