#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "smoothcond/bidiagonal.hpp"
#include "smoothcond/error.hpp"
#include "smoothcond/matrix.hpp"
#include "smoothcond/random.hpp"

namespace smoothcond {

// N(center, sigma^2 I) on R^{m x n}. sigma = 0 is the point mass at the center.
class GaussianEnsemble {
 public:
  GaussianEnsemble(Matrix center, double sigma) : center_(std::move(center)), sigma_(sigma) {
    if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
      throw DomainError("ensemble sigma must be finite and >= 0, got " + std::to_string(sigma_));
    }
  }

  static GaussianEnsemble standard(std::size_t m, std::size_t n) {
    return GaussianEnsemble(Matrix(m, n), 1.0);
  }

  const Matrix& center() const noexcept { return center_; }
  double sigma() const noexcept { return sigma_; }
  std::size_t rows() const noexcept { return center_.rows(); }
  std::size_t cols() const noexcept { return center_.cols(); }

  // The regime 0 < sigma <= 1 in which the tail theorem is stated.
  bool in_theorem_regime() const noexcept { return sigma_ > 0.0 && sigma_ <= 1.0; }

 private:
  Matrix center_;
  double sigma_;
};

// Entries are drawn in row-major order from a single stream.
inline Matrix sample_gaussian_matrix(const GaussianEnsemble& e, Rng& rng) {
  Matrix a = e.center();
  if (e.sigma() == 0.0) return a;
  for (double& x : a.data()) x += e.sigma() * rng.normal();
  return a;
}

inline Matrix sample_gaussian_matrix(const GaussianEnsemble& e, Seed s) {
  Rng rng(s);
  return sample_gaussian_matrix(e, rng);
}

inline constexpr std::size_t kChiDirectSumMaxDegrees = 64;

// r >= 0 with r^2 ~ chi^2_k. Small k sums k squared normals; larger k uses
// chi^2_k = 2 Gamma(k/2).
inline double sample_chi(std::size_t k, Rng& rng) {
  if (k == 0) throw DomainError("chi degrees of freedom must be >= 1");
  if (k <= kChiDirectSumMaxDegrees) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double z = rng.normal();
      s += z * z;
    }
    return std::sqrt(s);
  }
  return std::sqrt(2.0 * rng.gamma(0.5 * static_cast<double>(k)));
}

inline double sample_chi(std::size_t k, Seed s) {
  Rng rng(s);
  return sample_chi(k, rng);
}

// The bidiagonal chi model of a standard Gaussian m x n matrix: diagonal
// entries chi_n, chi_{n-1}, ..., chi_{n-m+1}; subdiagonal chi_{m-1}, ..., chi_1.
inline BidiagonalForm sample_bidiagonal_model(std::size_t m, std::size_t n, Rng& rng) {
  if (m < 1 || m > n) throw DimensionError("bidiagonal model requires 1 <= m <= n");
  BidiagonalForm y;
  y.cols = n;
  y.diagonal.resize(m);
  y.subdiagonal.resize(m - 1);
  for (std::size_t i = 0; i < m; ++i) y.diagonal[i] = sample_chi(n - i, rng);
  for (std::size_t i = 0; i + 1 < m; ++i) y.subdiagonal[i] = sample_chi(m - 1 - i, rng);
  return y;
}

inline BidiagonalForm sample_bidiagonal_model(std::size_t m, std::size_t n, Seed s) {
  Rng rng(s);
  return sample_bidiagonal_model(m, n, rng);
}

// Uniform point on S^{m-1}: a normalized standard Gaussian vector.
inline Vector sample_unit_sphere(std::size_t m, Rng& rng) {
  if (m < 1) throw DomainError("sphere dimension must be >= 1");
  Vector v(m);
  double nrm = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    nrm = norm2(v);
  } while (nrm == 0.0);
  for (double& x : v) x /= nrm;
  return v;
}

inline Vector sample_unit_sphere(std::size_t m, Seed s) {
  Rng rng(s);
  return sample_unit_sphere(m, rng);
}

}  // namespace smoothcond
