#include "anomdiff/render.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace anomdiff {

namespace {

std::uint8_t quantize(double v) {
  const double r = std::nearbyint(std::clamp(v, 0.0, 255.0));
  return static_cast<std::uint8_t>(r);
}

}  // namespace

void RenderConfig::check_valid() const {
  if (psf_sigma <= 0.0) throw std::invalid_argument("RenderConfig: psf_sigma must be positive");
  if (particle_intensity < 0.0 || background < 0.0 || noise_sigma < 0.0) {
    throw std::invalid_argument("RenderConfig: negative intensity term");
  }
  if (particle_intensity + background > 255.0) {
    throw std::invalid_argument("RenderConfig: intensity + background exceeds 255");
  }
  if (bit_depth != 8) throw std::invalid_argument("RenderConfig: only 8-bit output supported");
}

GrayImage FrameStack::frame(int f) const {
  GrayImage img;
  img.width = width;
  img.height = height;
  const std::size_t sz = static_cast<std::size_t>(width) * height;
  img.pixels.assign(data.begin() + static_cast<std::ptrdiff_t>(f * sz),
                    data.begin() + static_cast<std::ptrdiff_t>((f + 1) * sz));
  return img;
}

FrameStack render_frames(const std::vector<Trajectory>& trajectories, int n_frames, int size,
                         const RenderConfig& cfg, Rng& rng) {
  cfg.check_valid();
  if (n_frames < 1 || size < 1) throw std::invalid_argument("render_frames: empty stack");

  FrameStack stack;
  stack.n_frames = n_frames;
  stack.height = size;
  stack.width = size;
  stack.data.resize(static_cast<std::size_t>(n_frames) * size * size);

  const double inv2s2 = 1.0 / (2.0 * cfg.psf_sigma * cfg.psf_sigma);
  const int reach = static_cast<int>(std::ceil(4.0 * cfg.psf_sigma)) + 1;
  std::vector<double> buf(static_cast<std::size_t>(size) * size);

  for (int f = 0; f < n_frames; ++f) {
    std::fill(buf.begin(), buf.end(), cfg.background);
    for (const auto& traj : trajectories) {
      if (f < traj.start_frame || f >= traj.end_frame()) continue;
      const Point& p = traj.points[static_cast<std::size_t>(f - traj.start_frame)];
      const int x0 = std::max(0, static_cast<int>(std::floor(p.x)) - reach);
      const int x1 = std::min(size - 1, static_cast<int>(std::ceil(p.x)) + reach);
      const int y0 = std::max(0, static_cast<int>(std::floor(p.y)) - reach);
      const int y1 = std::min(size - 1, static_cast<int>(std::ceil(p.y)) + reach);
      for (int y = y0; y <= y1; ++y) {
        const double dy = y - p.y;
        for (int x = x0; x <= x1; ++x) {
          const double dx = x - p.x;
          buf[static_cast<std::size_t>(y) * size + x] +=
              cfg.particle_intensity * std::exp(-(dx * dx + dy * dy) * inv2s2);
        }
      }
    }
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double v = buf[static_cast<std::size_t>(y) * size + x];
        if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * rng.normal();
        stack.at(f, y, x) = quantize(v);
      }
    }
  }
  return stack;
}

GrayImage render_vip_frame(const std::vector<Trajectory>& trajectories,
                           const std::vector<int>& vip_indices, int size, double radius) {
  if (vip_indices.size() > 255) throw std::invalid_argument("render_vip_frame: more than 255 labels");
  GrayImage img;
  img.width = size;
  img.height = size;
  img.pixels.assign(static_cast<std::size_t>(size) * size, 0);
  const double r2 = radius * radius;
  for (std::size_t l = 0; l < vip_indices.size(); ++l) {
    const Trajectory& traj = trajectories[static_cast<std::size_t>(vip_indices[l])];
    if (traj.start_frame != 0 || traj.points.empty()) continue;
    const Point& p = traj.points[0];
    const int x0 = std::max(0, static_cast<int>(std::floor(p.x - radius)));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(p.x + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(p.y - radius)));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(p.y + radius)));
    const std::uint8_t label = static_cast<std::uint8_t>(l + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - p.x, dy = y - p.y;
        if (dx * dx + dy * dy <= r2 && img.at(y, x) == 0) img.at(y, x) = label;
      }
    }
  }
  return img;
}

std::vector<int> select_vips(const std::vector<Trajectory>& trajectories, int n) {
  std::vector<int> out;
  for (std::size_t i = 0; i < trajectories.size() && static_cast<int>(out.size()) < n; ++i) {
    if (trajectories[i].start_frame == 0 && !trajectories[i].points.empty()) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

void write_pgm(const std::string& path, const GrayImage& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_pgm: cannot open " + path);
  f << "P5\n" << image.width << " " << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (!f) throw std::runtime_error("write_pgm: write failed for " + path);
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw std::runtime_error("read_pgm: " + path + " is not binary PGM");
  auto next_int = [&]() {
    // Skips whitespace and '#' comment lines between header fields.
    for (;;) {
      const int c = f.peek();
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
    int v = -1;
    f >> v;
    return v;
  };
  GrayImage img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (img.width <= 0 || img.height <= 0 || maxval != 255) {
    throw std::runtime_error("read_pgm: unsupported header in " + path);
  }
  f.get();  // single whitespace after maxval
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  f.read(reinterpret_cast<char*>(img.pixels.data()),
         static_cast<std::streamsize>(img.pixels.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw std::runtime_error("read_pgm: truncated pixel data in " + path);
  }
  return img;
}

}  // namespace anomdiff
