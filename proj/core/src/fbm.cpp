#include "anomdiff/fbm.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace anomdiff {

namespace {

constexpr int kMaxSteps = 1 << 20;
constexpr double kPi = 3.14159265358979323846;

// fGn autocovariance: gamma(j) = v/2 * (|j+1|^2H - 2|j|^2H + |j-1|^2H).
double fgn_autocov(int j, double hurst, double variance) {
  const double h2 = 2.0 * hurst;
  const double jd = static_cast<double>(j);
  return 0.5 * variance *
         (std::pow(jd + 1.0, h2) - 2.0 * std::pow(jd, h2) + std::pow(std::abs(jd - 1.0), h2));
}

// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Davies-Harte / circulant embedding. Returns false when the embedding has
// a materially negative eigenvalue (tiny negatives are clamped as roundoff).
bool fgn_davies_harte(int n, double hurst, double variance, Rng& rng, std::vector<double>& out) {
  std::size_t m = 1;
  while (m < 2 * static_cast<std::size_t>(n)) m <<= 1;
  const std::size_t half = m / 2;

  std::vector<std::complex<double>> row(m);
  for (std::size_t j = 0; j <= half; ++j) {
    row[j] = fgn_autocov(static_cast<int>(j), hurst, variance);
  }
  for (std::size_t j = half + 1; j < m; ++j) row[j] = row[m - j];
  fft(row);

  double max_eig = 0.0;
  for (const auto& c : row) max_eig = std::max(max_eig, c.real());
  const double tol = 1e-8 * std::max(max_eig, 1.0);
  std::vector<double> lambda(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double eig = row[j].real();
    if (eig < -tol) return false;
    lambda[j] = std::max(eig, 0.0);
  }

  std::vector<std::complex<double>> v(m);
  v[0] = std::sqrt(lambda[0]) * rng.normal();
  for (std::size_t j = 1; j < half; ++j) {
    const double a = rng.normal();
    const double b = rng.normal();
    const double s = std::sqrt(lambda[j] / 2.0);
    v[j] = std::complex<double>(s * a, s * b);
    v[m - j] = std::conj(v[j]);
  }
  v[half] = std::sqrt(lambda[half]) * rng.normal();

  fft(v);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  out.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(j)].real() * scale;
  return true;
}

// Hosking / Durbin-Levinson exact recursion, O(n^2).
void fgn_hosking(int n, double hurst, double variance, Rng& rng, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(n));
  std::vector<double> gamma(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) gamma[static_cast<std::size_t>(j)] = fgn_autocov(j, hurst, variance);

  out[0] = std::sqrt(gamma[0]) * rng.normal();
  if (n == 1) return;

  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  std::vector<double> prev(static_cast<std::size_t>(n), 0.0);
  double sigma2 = gamma[0];

  for (int i = 1; i < n; ++i) {
    double acc = gamma[static_cast<std::size_t>(i)];
    for (int k = 1; k < i; ++k) acc -= prev[static_cast<std::size_t>(k)] * gamma[static_cast<std::size_t>(i - k)];
    const double kappa = sigma2 > 0.0 ? acc / sigma2 : 0.0;

    phi[static_cast<std::size_t>(i)] = kappa;
    for (int k = 1; k < i; ++k) {
      phi[static_cast<std::size_t>(k)] =
          prev[static_cast<std::size_t>(k)] - kappa * prev[static_cast<std::size_t>(i - k)];
    }
    sigma2 = std::max(sigma2 * (1.0 - kappa * kappa), 0.0);

    double mean = 0.0;
    for (int k = 1; k <= i; ++k) mean += phi[static_cast<std::size_t>(k)] * out[static_cast<std::size_t>(i - k)];
    out[static_cast<std::size_t>(i)] = mean + std::sqrt(sigma2) * rng.normal();
    std::copy(phi.begin(), phi.begin() + i + 1, prev.begin());
  }
}

}  // namespace

std::vector<double> sample_fgn(int n, double hurst, double variance, Rng& rng, FbmMethod method) {
  if (n < 1) throw std::invalid_argument("sample_fgn: n must be >= 1");
  if (n > kMaxSteps) throw std::invalid_argument("sample_fgn: n exceeds 2^20 embedding bound");
  if (!(hurst > 0.0) || hurst > 1.0) throw std::invalid_argument("sample_fgn: H outside (0, 1]");
  if (variance < 0.0) throw std::invalid_argument("sample_fgn: negative variance");

  std::vector<double> out;
  if (variance == 0.0) {
    out.assign(static_cast<std::size_t>(n), 0.0);
    return out;
  }
  switch (method) {
    case FbmMethod::DaviesHarte:
      if (!fgn_davies_harte(n, hurst, variance, rng, out)) {
        throw std::runtime_error("sample_fgn: circulant embedding not nonnegative-definite");
      }
      return out;
    case FbmMethod::Hosking:
      fgn_hosking(n, hurst, variance, rng, out);
      return out;
    case FbmMethod::Auto:
    default:
      if (!fgn_davies_harte(n, hurst, variance, rng, out)) {
        fgn_hosking(n, hurst, variance, rng, out);
      }
      return out;
  }
}

Displacements sample_fbm_displacements(int n, const DiffusionParams& params, Rng& rng, FbmMethod method) {
  const double hurst = params.alpha / 2.0;
  Displacements d;
  d.dx = sample_fgn(n, hurst, params.k, rng, method);
  d.dy = sample_fgn(n, hurst, params.k, rng, method);
  return d;
}

}  // namespace anomdiff
