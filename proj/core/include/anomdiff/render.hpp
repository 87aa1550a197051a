#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anomdiff/rng.hpp"
#include "anomdiff/types.hpp"

namespace anomdiff {

struct RenderConfig {
  double psf_sigma = 1.0;        // px
  double particle_intensity = 200.0;  // peak counts above background
  double background = 10.0;      // counts
  double noise_sigma = 1.0;      // additive Gaussian read noise, counts
  int bit_depth = 8;

  // Throws std::invalid_argument: negative values, intensity + background
  // above the 8-bit ceiling, bit_depth != 8.
  void check_valid() const;
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct FrameStack {
  int n_frames = 0;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;  // [frame][y][x]

  std::uint8_t& at(int f, int y, int x) {
    return data[(static_cast<std::size_t>(f) * height + y) * width + x];
  }
  std::uint8_t at(int f, int y, int x) const {
    return data[(static_cast<std::size_t>(f) * height + y) * width + x];
  }
  GrayImage frame(int f) const;
};

// Each particle visible in a frame becomes an isotropic Gaussian spot of
// sigma = psf_sigma sampled at integer pixel centers (a particle at (x, y)
// peaks at pixel column x, row y). Background, then per-pixel read noise,
// then clipping to [0, 255].
FrameStack render_frames(const std::vector<Trajectory>& trajectories, int n_frames, int size,
                         const RenderConfig& cfg, Rng& rng);

// Labels painted as filled disks (radius px) at each chosen trajectory's
// frame-0 position; pixel value = label, 0 = background. Trajectories not
// starting at frame 0 are skipped. Earlier labels win overlaps.
GrayImage render_vip_frame(const std::vector<Trajectory>& trajectories,
                           const std::vector<int>& vip_indices, int size, double radius = 1.2);

// Indices of the first n trajectories present at frame 0, in id order.
// Label l = position in the returned list + 1.
std::vector<int> select_vips(const std::vector<Trajectory>& trajectories, int n);

// Binary PGM (P5), maxval 255.
void write_pgm(const std::string& path, const GrayImage& image);
GrayImage read_pgm(const std::string& path);

}  // namespace anomdiff
