// Deterministic counter-based random-number generator.
//
// The raw 64-bit stream is a splitmix64 counter walk: the same seed yields
// the same bit pattern on every platform. Floating-point transforms
// (uniform, normal) are deterministic for a given binary; normal() goes
// through libm log/sqrt/cos and so is reproducible per toolchain rather
// than across toolchains.
//
// Generators are single-owner: pass them explicitly, never share one across
// threads. split() derives an independent stream from the original seed and
// a stream id, so parallel work can hand each unit its own generator.
#pragma once

#include <cmath>
#include <cstdint>

namespace anomdiff {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller. Consumes two uniforms per pair and
  // caches the second value.
  double normal();

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Poisson draw; exact product method for small means, normal
  // approximation above 50 (adequate for count initialization).
  int poisson(double mean);

  // Independent stream derived from the original seed and a stream id.
  // Independent of how many draws this generator has produced.
  Rng split(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

inline Rng Rng::split(std::uint64_t stream_id) const {
  const std::uint64_t h = detail::mix64(seed_ ^ detail::mix64(stream_id + 0xD1B54A32D192ED03ull));
  return Rng(h);
}

inline double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

inline int Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 50.0) {
    const double limit = std::exp(-mean);
    int n = -1;
    double prod = 1.0;
    do {
      prod *= uniform();
      ++n;
    } while (prod > limit);
    return n;
  }
  const double draw = mean + std::sqrt(mean) * normal();
  return draw < 0.0 ? 0 : static_cast<int>(draw + 0.5);
}

}  // namespace anomdiff
