#pragma once

#include <string>
#include <vector>

#include "anomdiff/render.hpp"

namespace anomdiff {

struct DetectConfig {
  int diameter = 3;        // odd, px
  double minmass = 13.0;   // integrated brightness, raw counts
  double separation = 2.6; // px
  int border_pad = -1;     // px; < 0 means diameter

  int pad() const { return border_pad < 0 ? diameter : border_pad; }

  // Throws std::invalid_argument: even or < 3 diameter, separation <= 0,
  // minmass < 0.
  void check_valid() const;
};

struct Detection {
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  double mass = 0.0;
};

struct FilteredFrame {
  int width = 0;
  int height = 0;           // padded dimensions
  int pad = 0;
  double scale = 1.0;       // raw counts per normalized unit (frame std)
  std::vector<double> values;

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Mirror-pads by cfg.pad(), normalizes to zero mean and unit variance, then
// band-passes: Gaussian blur (sigma = diameter/4) minus boxcar mean of width
// 2*diameter+1, negatives clipped to 0. Throws when the frame is smaller
// than 2*diameter on either side.
FilteredFrame preprocess(const GrayImage& frame, const DetectConfig& cfg);

// Local maxima of the filtered frame, pruned so no two survivors are closer
// than separation (higher mass wins, ties to smaller (y, x)), each refined
// by an intensity-weighted centroid over a disk of radius diameter/2. Mass
// is reported in raw counts. Coordinates are in unpadded frame coordinates.
std::vector<Detection> locate(const GrayImage& frame, int frame_index, const DetectConfig& cfg);

// All frames of a stack, concatenated in frame order.
std::vector<Detection> locate_stack(const FrameStack& stack, const DetectConfig& cfg);

// `frame,x,y,mass` CSV, one row per detection.
std::string detections_to_csv(const std::vector<Detection>& detections);
std::vector<Detection> read_detections_csv(const std::string& path);

}  // namespace anomdiff
