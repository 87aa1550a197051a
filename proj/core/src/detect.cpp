#include "anomdiff/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "anomdiff/csv.hpp"
#include "csv_detail.hpp"

namespace anomdiff {

namespace {

// Symmetric reflection (edge repeated) into [0, n).
int mirror_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

// Separable convolution with mirror boundary. kernel is centered, odd length.
void convolve_separable(std::vector<double>& img, int w, int h, const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size()) / 2;
  std::vector<double> tmp(img.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        acc += kernel[static_cast<std::size_t>(k + r)] *
               img[static_cast<std::size_t>(y) * w + mirror_index(x + k, w)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        acc += kernel[static_cast<std::size_t>(k + r)] *
               tmp[static_cast<std::size_t>(mirror_index(y + k, h)) * w + x];
      }
      img[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + r)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Disk offsets of radius diameter/2 (the feature mask).
std::vector<std::pair<int, int>> mask_offsets(int diameter) {
  const double r = diameter / 2.0;
  const double r2 = r * r;
  const int ri = static_cast<int>(std::floor(r));
  std::vector<std::pair<int, int>> out;
  for (int dy = -ri; dy <= ri; ++dy) {
    for (int dx = -ri; dx <= ri; ++dx) {
      if (dx * dx + dy * dy <= r2) out.emplace_back(dy, dx);
    }
  }
  return out;
}

struct Candidate {
  int y, x;
  double mass;
};

}  // namespace

void DetectConfig::check_valid() const {
  if (diameter < 3 || diameter % 2 == 0) {
    throw std::invalid_argument("DetectConfig: diameter must be odd and >= 3");
  }
  if (separation <= 0.0) throw std::invalid_argument("DetectConfig: separation must be positive");
  if (minmass < 0.0) throw std::invalid_argument("DetectConfig: minmass must be >= 0");
}

FilteredFrame preprocess(const GrayImage& frame, const DetectConfig& cfg) {
  cfg.check_valid();
  if (frame.width < 2 * cfg.diameter || frame.height < 2 * cfg.diameter) {
    throw std::invalid_argument("preprocess: frame smaller than twice the feature diameter");
  }

  double mean = 0.0;
  for (auto v : frame.pixels) mean += v;
  mean /= static_cast<double>(frame.pixels.size());
  double var = 0.0;
  for (auto v : frame.pixels) var += (v - mean) * (v - mean);
  var /= static_cast<double>(frame.pixels.size());
  const double stddev = std::sqrt(var);

  const int pad = cfg.pad();
  FilteredFrame out;
  out.pad = pad;
  out.width = frame.width + 2 * pad;
  out.height = frame.height + 2 * pad;
  out.values.assign(static_cast<std::size_t>(out.width) * out.height, 0.0);
  out.scale = stddev > 0.0 ? stddev : 1.0;
  if (stddev <= 0.0) return out;  // constant frame: band-pass output is zero

  for (int y = 0; y < out.height; ++y) {
    const int sy = mirror_index(y - pad, frame.height);
    for (int x = 0; x < out.width; ++x) {
      const int sx = mirror_index(x - pad, frame.width);
      out.at(y, x) = (frame.at(sy, sx) - mean) / stddev;
    }
  }

  std::vector<double> blurred = out.values;
  convolve_separable(blurred, out.width, out.height, gaussian_kernel(cfg.diameter / 4.0));
  std::vector<double> boxed = out.values;
  const int bw = 2 * cfg.diameter + 1;
  convolve_separable(boxed, out.width, out.height,
                     std::vector<double>(static_cast<std::size_t>(bw), 1.0 / bw));
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = std::max(blurred[i] - boxed[i], 0.0);
  }
  return out;
}

std::vector<Detection> locate(const GrayImage& frame, int frame_index, const DetectConfig& cfg) {
  const FilteredFrame f = preprocess(frame, cfg);
  const auto mask = mask_offsets(cfg.diameter);
  const int pad = f.pad;

  auto mask_mass = [&](int cy, int cx) {
    double m = 0.0;
    for (const auto& [dy, dx] : mask) {
      const int y = cy + dy, x = cx + dx;
      if (y >= 0 && y < f.height && x >= 0 && x < f.width) m += f.at(y, x);
    }
    return m;
  };

  // 8-neighbor maxima restricted to the original (unpadded) region.
  std::vector<Candidate> candidates;
  for (int y = pad; y < f.height - pad; ++y) {
    for (int x = pad; x < f.width - pad; ++x) {
      const double v = f.at(y, x);
      if (v <= 0.0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const double nv = f.at(y + dy, x + dx);
          if (nv > v || (nv == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            // Plateau ties go to the smaller (y, x) pixel.
            is_max = false;
            break;
          }
        }
      }
      if (is_max) candidates.push_back({y, x, mask_mass(y, x)});
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  const double sep2 = cfg.separation * cfg.separation;
  std::vector<Candidate> kept;
  for (const auto& c : candidates) {
    bool ok = true;
    for (const auto& k : kept) {
      const double dy = c.y - k.y, dx = c.x - k.x;
      if (dy * dy + dx * dx < sep2) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c);
  }

  std::vector<Detection> detections;
  for (const auto& c : kept) {
    int cy = c.y, cx = c.x;
    double oy = 0.0, ox = 0.0;
    double mass = 0.0;
    for (int iter = 0; iter < 10; ++iter) {
      mass = 0.0;
      double sy = 0.0, sx = 0.0;
      for (const auto& [dy, dx] : mask) {
        const int y = cy + dy, x = cx + dx;
        if (y < 0 || y >= f.height || x < 0 || x >= f.width) continue;
        const double v = f.at(y, x);
        mass += v;
        sy += v * dy;
        sx += v * dx;
      }
      if (mass <= 0.0) break;
      oy = sy / mass;
      ox = sx / mass;
      if (std::abs(oy) <= 0.5 && std::abs(ox) <= 0.5) break;
      cy += oy > 0.5 ? 1 : (oy < -0.5 ? -1 : 0);
      cx += ox > 0.5 ? 1 : (ox < -0.5 ? -1 : 0);
      cy = std::clamp(cy, 0, f.height - 1);
      cx = std::clamp(cx, 0, f.width - 1);
    }
    const double raw_mass = mass * f.scale;
    if (raw_mass < cfg.minmass) continue;
    Detection d;
    d.frame = frame_index;
    d.x = static_cast<double>(cx) + ox - pad;
    d.y = static_cast<double>(cy) + oy - pad;
    d.mass = raw_mass;
    detections.push_back(d);
  }

  // Refinement can pull survivors together; enforce separation on the final
  // sub-pixel coordinates too.
  std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  std::vector<Detection> survivors;
  for (const auto& d : detections) {
    bool ok = true;
    for (const auto& k : survivors) {
      const double dy = d.y - k.y, dx = d.x - k.x;
      if (dy * dy + dx * dx < sep2) {
        ok = false;
        break;
      }
    }
    if (ok) survivors.push_back(d);
  }

  std::sort(survivors.begin(), survivors.end(), [](const Detection& a, const Detection& b) {
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  return survivors;
}

std::vector<Detection> locate_stack(const FrameStack& stack, const DetectConfig& cfg) {
  std::vector<Detection> all;
  for (int fidx = 0; fidx < stack.n_frames; ++fidx) {
    std::vector<Detection> d = locate(stack.frame(fidx), fidx, cfg);
    all.insert(all.end(), d.begin(), d.end());
  }
  return all;
}

std::string detections_to_csv(const std::vector<Detection>& detections) {
  std::string out = "frame,x,y,mass\n";
  for (const auto& d : detections) {
    out += std::to_string(d.frame);
    out += ',';
    out += format_double(d.x);
    out += ',';
    out += format_double(d.y);
    out += ',';
    out += format_double(d.mass);
    out += '\n';
  }
  return out;
}

std::vector<Detection> read_detections_csv(const std::string& path) {
  std::vector<Detection> out;
  csvdetail::for_each_row(path, "frame,x,y,mass",
                          [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 4) csvdetail::fail(path, line, "expected 4 fields");
    Detection d;
    d.frame = static_cast<int>(csvdetail::parse_int_field(f[0], path, line));
    d.x = csvdetail::parse_double_field(f[1], path, line);
    d.y = csvdetail::parse_double_field(f[2], path, line);
    d.mass = csvdetail::parse_double_field(f[3], path, line);
    if (d.frame < 0) csvdetail::fail(path, line, "negative frame");
    out.push_back(d);
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
  return out;
}

}  // namespace anomdiff
