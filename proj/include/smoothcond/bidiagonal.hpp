#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "smoothcond/error.hpp"
#include "smoothcond/matrix.hpp"

namespace smoothcond {

// Lower bidiagonal m x n matrix Y (m <= n): `diagonal` holds Y(i,i) for i < m,
// `subdiagonal` holds Y(i+1,i) for i < m-1, every other entry is zero.
struct BidiagonalForm {
  Vector diagonal;
  Vector subdiagonal;
  std::size_t cols = 0;

  std::size_t rows() const noexcept { return diagonal.size(); }

  Matrix to_matrix() const {
    Matrix y(rows(), cols);
    for (std::size_t i = 0; i < rows(); ++i) y(i, i) = diagonal[i];
    for (std::size_t i = 0; i + 1 < rows(); ++i) y(i + 1, i) = subdiagonal[i];
    return y;
  }
};

namespace detail {

// Reflector H = I - beta v v^T with v[0] = 1 such that H x = alpha e_1, alpha = ||x|| >= 0.
struct Householder {
  std::vector<double> v;
  double beta = 0.0;
  double alpha = 0.0;
};

inline Householder make_householder(std::span<const double> x) {
  Householder h;
  h.v.assign(x.begin(), x.end());
  h.v[0] = 1.0;
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i] * x[i];
  const double x0 = x[0];
  if (tail == 0.0) {
    // x is already a multiple of e_1; flip the sign if needed.
    h.beta = x0 >= 0.0 ? 0.0 : 2.0;
    h.alpha = std::abs(x0);
    return h;
  }
  const double mu = std::sqrt(x0 * x0 + tail);
  const double v0 = x0 <= 0.0 ? x0 - mu : -tail / (x0 + mu);
  h.beta = 2.0 * v0 * v0 / (tail + v0 * v0);
  for (std::size_t i = 1; i < x.size(); ++i) h.v[i] = x[i] / v0;
  h.alpha = mu;
  return h;
}

// Apply H (acting on indices [off, off + v.size())) from the right to rows
// [row_begin, rows) of M: M <- M H.
inline void reflect_columns(Matrix& m, const Householder& h, std::size_t off, std::size_t row_begin) {
  if (h.beta == 0.0) return;
  const std::size_t len = h.v.size();
  for (std::size_t i = row_begin; i < m.rows(); ++i) {
    auto r = m.row(i);
    double s = 0.0;
    for (std::size_t l = 0; l < len; ++l) s += r[off + l] * h.v[l];
    s *= h.beta;
    if (s == 0.0) continue;
    for (std::size_t l = 0; l < len; ++l) r[off + l] -= s * h.v[l];
  }
}

// Apply H (acting on row indices [off, off + v.size())) from the left to
// columns [col_begin, cols) of M: M <- H M.
inline void reflect_rows(Matrix& m, const Householder& h, std::size_t off, std::size_t col_begin) {
  if (h.beta == 0.0) return;
  const std::size_t len = h.v.size();
  std::vector<double> w(m.cols() - col_begin, 0.0);
  for (std::size_t l = 0; l < len; ++l) {
    const auto r = m.row(off + l);
    for (std::size_t j = col_begin; j < m.cols(); ++j) w[j - col_begin] += h.v[l] * r[j];
  }
  for (std::size_t l = 0; l < len; ++l) {
    auto r = m.row(off + l);
    const double f = h.beta * h.v[l];
    if (f == 0.0) continue;
    for (std::size_t j = col_begin; j < m.cols(); ++j) r[j] -= f * w[j - col_begin];
  }
}

struct UpperBidiagonal {
  Vector d;  // B(i,i)
  Vector e;  // B(i,i+1)
};

// Golub-Kahan Householder reduction of a tall p x q matrix (p >= q), consumed
// in place: M = U [B; 0] V^T with B upper bidiagonal and nonnegative entries.
// When requested, U (p x p) and V (q x q) are accumulated.
inline UpperBidiagonal upper_bidiagonalize(Matrix& m, Matrix* u, Matrix* v) {
  const std::size_t p = m.rows();
  const std::size_t q = m.cols();
  if (p < q) throw DimensionError("upper_bidiagonalize needs rows >= cols");
  if (u) *u = Matrix::identity(p);
  if (v) *v = Matrix::identity(q);

  UpperBidiagonal b;
  b.d.assign(q, 0.0);
  b.e.assign(q > 0 ? q - 1 : 0, 0.0);
  std::vector<double> x;
  for (std::size_t k = 0; k < q; ++k) {
    x.resize(p - k);
    for (std::size_t i = k; i < p; ++i) x[i - k] = m(i, k);
    const Householder left = make_householder(x);
    reflect_rows(m, left, k, k + 1);
    if (u) reflect_columns(*u, left, k, 0);
    b.d[k] = left.alpha;
    m(k, k) = left.alpha;
    for (std::size_t i = k + 1; i < p; ++i) m(i, k) = 0.0;

    if (k + 1 < q) {
      const auto r = m.row(k);
      const Householder right = make_householder(r.subspan(k + 1));
      reflect_columns(m, right, k + 1, k + 1);
      if (v) reflect_columns(*v, right, k + 1, 0);
      b.e[k] = right.alpha;
      m(k, k + 1) = right.alpha;
      for (std::size_t j = k + 2; j < q; ++j) m(k, j) = 0.0;
    }
  }
  return b;
}

}  // namespace detail

// Two-sided Householder reduction of A (m <= n) to the lower bidiagonal form
// with nonnegative entries. Singular values are preserved.
inline BidiagonalForm bidiagonalize(const Matrix& a) {
  if (a.rows() > a.cols()) {
    throw DimensionError("bidiagonalize requires m <= n (got " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + "); transpose first");
  }
  // A^T = U [B; 0] V^T with B upper bidiagonal, so A = V [B^T 0] U^T.
  Matrix t = a.transpose();
  auto b = detail::upper_bidiagonalize(t, nullptr, nullptr);
  return BidiagonalForm{std::move(b.d), std::move(b.e), a.cols()};
}

}  // namespace smoothcond
