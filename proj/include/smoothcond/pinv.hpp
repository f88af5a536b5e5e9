#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "smoothcond/error.hpp"
#include "smoothcond/matrix.hpp"
#include "smoothcond/svd.hpp"

namespace smoothcond {

inline double spectral_norm(const Matrix& a) { return singular_values(a).front(); }

inline double spectral_norm(const BidiagonalForm& y) { return singular_values(y).front(); }

namespace detail {

inline void require_full_rank(const Vector& s, std::size_t m, std::size_t n) {
  const double smax = s.front();
  const double smin = s.back();
  if (!(smin > rank_tol(m, n) * smax)) throw RankDeficientError(smin, smax);
}

}  // namespace detail

// Moore-Penrose inverse of a full-rank matrix, n x m. Both m <= n and m > n
// are accepted; the SVD handles the transpose internally.
inline Matrix pseudo_inverse(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const SvdFactors f = svd(a);
  detail::require_full_rank(f.singular_values, m, n);
  const std::size_t k = f.singular_values.size();
  Matrix p(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        s += f.right_vectors(i, l) * f.left_vectors(j, l) / f.singular_values[l];
      }
      p(i, j) = s;
    }
  }
  return p;
}

// kappa(A) = sigma_max / sigma_min; rank-deficient input raises RankDeficientError.
inline double condition_number(const Matrix& a) {
  const Vector s = singular_values(a);
  detail::require_full_rank(s, a.rows(), a.cols());
  return s.front() / s.back();
}

inline double tol_mp(double kappa) { return 1e-8 * kappa; }

// Relative residuals of the four Moore-Penrose identities for a candidate
// pseudo-inverse P of A.
struct MoorePenroseResiduals {
  double a_p_a = 0.0;      // ||APA - A||_F / ||A||_F
  double p_a_p = 0.0;      // ||PAP - P||_F / ||P||_F
  double ap_symmetry = 0.0;  // ||(AP)^T - AP||_F / ||AP||_F
  double pa_symmetry = 0.0;  // ||(PA)^T - PA||_F / ||PA||_F

  double max() const { return std::max({a_p_a, p_a_p, ap_symmetry, pa_symmetry}); }
};

inline MoorePenroseResiduals moore_penrose_residuals(const Matrix& a, const Matrix& p) {
  const Matrix ap = a * p;
  const Matrix pa = p * a;
  MoorePenroseResiduals r;
  r.a_p_a = frobenius_norm(ap * a - a) / frobenius_norm(a);
  r.p_a_p = frobenius_norm(pa * p - p) / frobenius_norm(p);
  r.ap_symmetry = frobenius_norm(ap.transpose() - ap) / frobenius_norm(ap);
  r.pa_symmetry = frobenius_norm(pa.transpose() - pa) / frobenius_norm(pa);
  return r;
}

namespace detail {

inline Vector apply_pinv(const Matrix& a, std::span<const double> b) {
  const SvdFactors f = svd(a);
  require_full_rank(f.singular_values, a.rows(), a.cols());
  const std::size_t k = f.singular_values.size();
  Vector coeff(k, 0.0);
  for (std::size_t l = 0; l < k; ++l) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.rows(); ++j) s += f.left_vectors(j, l) * b[j];
    coeff[l] = s / f.singular_values[l];
  }
  Vector x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.cols(); ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < k; ++l) s += f.right_vectors(i, l) * coeff[l];
    x[i] = s;
  }
  return x;
}

}  // namespace detail

// argmin ||Ax - b|| for an overdetermined full-column-rank A (m > n).
inline Vector solve_least_squares(const Matrix& a, std::span<const double> b) {
  if (a.rows() <= a.cols()) throw DimensionError("least squares needs m > n");
  if (b.size() != a.rows()) throw DimensionError("right-hand side length must equal rows");
  return detail::apply_pinv(a, b);
}

// argmin { ||x|| : Ax = b } for an underdetermined full-row-rank A (m < n).
inline Vector solve_min_norm(const Matrix& a, std::span<const double> b) {
  if (a.rows() >= a.cols()) throw DimensionError("minimum-norm solve needs m < n");
  if (b.size() != a.rows()) throw DimensionError("right-hand side length must equal rows");
  return detail::apply_pinv(a, b);
}

struct RowComplement {
  Vector component;  // projection of the last row onto span(first m-1 rows)^perp
  double norm = 0.0;
};

// Splits the last row a_m = a_m^perp + a_m^S against the span S of the other
// rows, using Gram-Schmidt with one reorthogonalization pass. Throws
// DimensionError when the first m-1 rows are numerically dependent.
inline RowComplement row_complement(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m > n) throw DimensionError("row_complement requires m <= n");

  std::vector<Vector> basis;
  basis.reserve(m - 1);
  auto project_out = [&](Vector& x) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : basis) {
        const double c = dot(q, x);
        for (std::size_t k = 0; k < n; ++k) x[k] -= c * q[k];
      }
    }
  };
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const auto r = a.row(i);
    Vector x(r.begin(), r.end());
    const double before = norm2(x);
    project_out(x);
    const double after = norm2(x);
    if (!(after > 1e-12 * before)) {
      throw DimensionError("row_complement: first m-1 rows are numerically dependent (row " +
                           std::to_string(i + 1) + ")");
    }
    for (double& v : x) v /= after;
    basis.push_back(std::move(x));
  }
  const auto last = a.row(m - 1);
  RowComplement out{Vector(last.begin(), last.end()), 0.0};
  project_out(out.component);
  out.norm = norm2(out.component);
  return out;
}

struct SharpestDirection {
  Vector direction;        // left singular vector of sigma_min, unit length
  bool ambiguous = false;  // sigma_min repeated within tol_svd
};

// u_A in S^{m-1} with ||A^+ u_A|| = ||A^+||.
inline SharpestDirection sharpest_direction(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m > n) throw DimensionError("sharpest_direction requires m <= n");
  const SvdFactors f = svd(a);
  detail::require_full_rank(f.singular_values, m, n);
  SharpestDirection out{f.left_vectors.column(m - 1), false};
  if (m >= 2) {
    const double gap = f.singular_values[m - 2] - f.singular_values[m - 1];
    out.ambiguous = gap <= tol_svd(m, n) * f.singular_values.front();
  }
  return out;
}

}  // namespace smoothcond
