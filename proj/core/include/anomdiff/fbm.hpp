// Fractional Gaussian noise generation for trajectory simulation.
//
// Increments follow the per-axis convention Var[x(t) - x(0)] = k * t^alpha
// with Hurst exponent H = alpha / 2, so each axis is fGn with variance k.
#pragma once

#include <vector>

#include "anomdiff/rng.hpp"
#include "anomdiff/types.hpp"

namespace anomdiff {

enum class FbmMethod {
  Auto,         // circulant embedding, Hosking if the embedding fails
  DaviesHarte,  // circulant embedding only; throws if not nonnegative-definite
  Hosking,      // O(n^2) Durbin-Levinson recursion
};

struct Displacements {
  std::vector<double> dx;
  std::vector<double> dy;
};

// n stationary Gaussian increments per axis, independent axes.
// Rejects n > 2^20 (circulant embedding memory bound). k = 0 yields zeros.
Displacements sample_fbm_displacements(int n, const DiffusionParams& params, Rng& rng,
                                       FbmMethod method = FbmMethod::Auto);

// Single-axis fGn, exposed for tests and reuse.
std::vector<double> sample_fgn(int n, double hurst, double variance, Rng& rng,
                               FbmMethod method = FbmMethod::Auto);

}  // namespace anomdiff
