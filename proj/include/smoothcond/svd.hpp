#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "smoothcond/bidiagonal.hpp"
#include "smoothcond/error.hpp"
#include "smoothcond/matrix.hpp"

namespace smoothcond {

// A = U diag(singular_values) V^T with U m x m and V n x n orthogonal and
// singular_values non-increasing, length min(m, n).
struct SvdFactors {
  Matrix left_vectors;
  Vector singular_values;
  Matrix right_vectors;
};

inline double tol_svd(std::size_t m, std::size_t n) {
  return 1e-10 * static_cast<double>(std::max(m, n));
}

inline double rank_tol(std::size_t m, std::size_t n) {
  return 1e-12 * static_cast<double>(std::max(m, n));
}

// Implicit QR sweeps are capped at this many times the bidiagonal dimension.
inline constexpr std::size_t kMaxSvdSweepsPerValue = 75;

namespace detail {

struct Rotation {
  double c = 1.0;
  double s = 0.0;
  double r = 0.0;
};

// [f g] * [[c, -s], [s, c]] = [r 0]
inline Rotation make_rotation(double f, double g) {
  if (g == 0.0) return {1.0, 0.0, f};
  if (f == 0.0) return {0.0, 1.0, g};
  const double r = std::hypot(f, g);
  return {f / r, g / r, r};
}

// columns (i, j) of X: X_i <- c X_i + s X_j, X_j <- -s X_i + c X_j
inline void rotate_columns(Matrix* x, std::size_t i, std::size_t j, double c, double s) {
  if (!x) return;
  for (std::size_t r = 0; r < x->rows(); ++r) {
    const double xi = (*x)(r, i);
    const double xj = (*x)(r, j);
    (*x)(r, i) = c * xi + s * xj;
    (*x)(r, j) = -s * xi + c * xj;
  }
}

// Diagonalise the upper bidiagonal (d, e) by Golub-Kahan implicit-shift QR.
// Left rotations are folded into the columns of U, right rotations into the
// columns of V (either may be null). On return e is zero and d holds the
// singular values, unsorted and possibly negative.
inline void bidiagonal_qr(Vector& d, Vector& e, Matrix* u, Matrix* v) {
  const std::size_t q = d.size();
  if (q <= 1) return;
  const double eps = std::numeric_limits<double>::epsilon();

  double bnorm = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    bnorm = std::max(bnorm, std::abs(d[i]) + (i + 1 < q ? std::abs(e[i]) : 0.0));
  }
  if (bnorm == 0.0) return;
  const double small = eps * bnorm;

  const std::size_t max_sweeps = kMaxSvdSweepsPerValue * q;
  std::size_t sweeps = 0;
  std::size_t hi = q - 1;
  while (hi > 0) {
    for (std::size_t i = 0; i < hi; ++i) {
      if (std::abs(e[i]) <= eps * (std::abs(d[i]) + std::abs(d[i + 1])) ||
          std::abs(e[i]) <= std::numeric_limits<double>::min()) {
        e[i] = 0.0;
      }
    }
    if (e[hi - 1] == 0.0) {
      --hi;
      continue;
    }
    std::size_t lo = hi - 1;
    while (lo > 0 && e[lo - 1] != 0.0) --lo;

    if (++sweeps > max_sweeps) throw ConvergenceError("bidiagonal QR did not converge", sweeps);

    // A negligible diagonal entry splits the block once its row or column is chased out.
    bool chased = false;
    for (std::size_t k = lo; k < hi; ++k) {
      if (std::abs(d[k]) > small) continue;
      d[k] = 0.0;
      double bulge = e[k];
      e[k] = 0.0;
      for (std::size_t j = k + 1; j <= hi && bulge != 0.0; ++j) {
        const Rotation g = make_rotation(d[j], bulge);
        d[j] = g.r;
        rotate_columns(u, j, k, g.c, g.s);
        if (j < hi) {
          bulge = -g.s * e[j];
          e[j] = g.c * e[j];
        }
      }
      chased = true;
      break;
    }
    if (chased) continue;
    if (std::abs(d[hi]) <= small) {
      d[hi] = 0.0;
      double bulge = e[hi - 1];
      e[hi - 1] = 0.0;
      for (std::size_t j = hi; j-- > lo && bulge != 0.0;) {
        const Rotation g = make_rotation(d[j], bulge);
        d[j] = g.r;
        rotate_columns(v, j, hi, g.c, g.s);
        if (j > lo) {
          bulge = -g.s * e[j - 1];
          e[j - 1] = g.c * e[j - 1];
        }
      }
      continue;
    }

    // Wilkinson shift from the trailing 2x2 block of B^T B.
    const double dm = d[hi - 1];
    const double em = hi - 1 > lo ? e[hi - 2] : 0.0;
    const double dn = d[hi];
    const double en = e[hi - 1];
    const double t11 = dm * dm + em * em;
    const double t22 = dn * dn + en * en;
    const double t12 = dm * en;
    const double half = 0.5 * (t11 - t22);
    const double root = std::hypot(half, t12);
    const double mu = half >= 0.0 ? t22 - t12 * t12 / (half + root)
                                  : t22 + t12 * t12 / (root - half);

    double y = d[lo] * d[lo] - mu;
    double z = d[lo] * e[lo];
    for (std::size_t k = lo; k < hi; ++k) {
      Rotation g = make_rotation(y, z);
      if (k > lo) e[k - 1] = g.r;
      double f = g.c * d[k] + g.s * e[k];
      e[k] = -g.s * d[k] + g.c * e[k];
      double bulge = g.s * d[k + 1];
      d[k + 1] = g.c * d[k + 1];
      d[k] = f;
      rotate_columns(v, k, k + 1, g.c, g.s);

      g = make_rotation(d[k], bulge);
      d[k] = g.r;
      f = g.c * e[k] + g.s * d[k + 1];
      d[k + 1] = -g.s * e[k] + g.c * d[k + 1];
      e[k] = f;
      if (k + 1 < hi) {
        z = g.s * e[k + 1];
        e[k + 1] = g.c * e[k + 1];
      }
      y = e[k];
      rotate_columns(u, k, k + 1, g.c, g.s);
    }
  }
}

// Fix the sign of a column so its first non-negligible coordinate is positive.
// Returns true when the column was negated.
inline bool canonical_sign(Matrix& x, std::size_t col) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double val = x(r, col);
    if (std::abs(val) > 1e-12) {
      if (val > 0.0) return false;
      for (std::size_t i = 0; i < x.rows(); ++i) x(i, col) = -x(i, col);
      return true;
    }
  }
  return false;
}

inline void negate_column(Matrix& x, std::size_t col) {
  for (std::size_t r = 0; r < x.rows(); ++r) x(r, col) = -x(r, col);
}

// Full SVD of a tall p x q matrix (p >= q): M = U [S; 0] V^T.
inline SvdFactors tall_svd(Matrix m) {
  Matrix u(1, 1);
  Matrix v(1, 1);
  auto b = detail::upper_bidiagonalize(m, &u, &v);
  bidiagonal_qr(b.d, b.e, &u, &v);

  const std::size_t q = b.d.size();
  for (std::size_t i = 0; i < q; ++i) {
    if (b.d[i] < 0.0) {
      b.d[i] = -b.d[i];
      negate_column(v, i);
    }
  }
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return b.d[i] > b.d[j]; });

  Matrix us = u;
  Matrix vs = v;
  Vector s(q);
  for (std::size_t k = 0; k < q; ++k) {
    s[k] = b.d[order[k]];
    for (std::size_t r = 0; r < u.rows(); ++r) us(r, k) = u(r, order[k]);
    for (std::size_t r = 0; r < v.rows(); ++r) vs(r, k) = v(r, order[k]);
  }
  return SvdFactors{std::move(us), std::move(s), std::move(vs)};
}

}  // namespace detail

// Singular values of an upper (or, equivalently, lower) bidiagonal matrix
// given by its diagonal and off-diagonal, non-increasing.
inline Vector bidiagonal_singular_values(Vector d, Vector e) {
  if (e.size() + 1 != d.size()) throw DimensionError("bidiagonal off-diagonal length must be n-1");
  detail::bidiagonal_qr(d, e, nullptr, nullptr);
  for (double& x : d) x = std::abs(x);
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

inline Vector singular_values(const BidiagonalForm& y) {
  return bidiagonal_singular_values(y.diagonal, y.subdiagonal);
}

// Singular values only, non-increasing; no vector accumulation.
inline Vector singular_values(const Matrix& a) {
  Matrix t = a.rows() >= a.cols() ? a : a.transpose();
  auto b = detail::upper_bidiagonalize(t, nullptr, nullptr);
  return bidiagonal_singular_values(std::move(b.d), std::move(b.e));
}

// Full SVD via Householder bidiagonalization and implicit-shift QR. Singular
// vector pairs are signed so the left vector's first nonzero coordinate is
// positive; for the unpaired columns of the larger factor the same rule is
// applied on their own.
inline SvdFactors svd(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  SvdFactors f = [&] {
    if (m >= n) return detail::tall_svd(a);
    // A^T = U S V^T  =>  A = V S^T U^T
    auto t = detail::tall_svd(a.transpose());
    return SvdFactors{std::move(t.right_vectors), std::move(t.singular_values),
                      std::move(t.left_vectors)};
  }();
  const std::size_t k = std::min(m, n);
  for (std::size_t i = 0; i < k; ++i) {
    if (detail::canonical_sign(f.left_vectors, i)) detail::negate_column(f.right_vectors, i);
  }
  for (std::size_t i = k; i < m; ++i) detail::canonical_sign(f.left_vectors, i);
  for (std::size_t i = k; i < n; ++i) detail::canonical_sign(f.right_vectors, i);
  return f;
}

}  // namespace smoothcond
