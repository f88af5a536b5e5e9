#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "smoothcond/bidiagonal.hpp"
#include "smoothcond/pinv.hpp"
#include "smoothcond/random.hpp"
#include "smoothcond/svd.hpp"

using namespace smoothcond;

namespace {

Matrix random_matrix(std::size_t m, std::size_t n, std::uint64_t stream) {
  Rng rng(Seed{2024, stream});
  Matrix a(m, n);
  for (double& x : a.data()) x = rng.normal();
  return a;
}

oracle::Dense to_dense(const Matrix& a) {
  oracle::Dense d(a.rows(), std::vector<double>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d[i][j] = a(i, j);
  return d;
}

double orthogonality_defect(const Matrix& q) {
  return frobenius_norm(q.transpose() * q - Matrix::identity(q.cols()));
}

Matrix reconstruct(const SvdFactors& f, std::size_t m, std::size_t n) {
  Matrix s(m, n);
  for (std::size_t i = 0; i < f.singular_values.size(); ++i) s(i, i) = f.singular_values[i];
  return f.left_vectors * s * f.right_vectors.transpose();
}

}  // namespace

TEST(Matrix, RejectsNonFiniteAndEmpty) {
  EXPECT_THROW(Matrix(0, 3), DimensionError);
  EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, std::nan(""), 4.0}), DomainError);
  EXPECT_THROW(Matrix(2, 2, {1.0, std::numeric_limits<double>::infinity(), 0.0, 4.0}), DomainError);
  EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
}

TEST(Matrix, CsvRoundTripIsExact) {
  const Matrix a = random_matrix(4, 7, 1);
  std::stringstream ss;
  write_csv(ss, a);
  EXPECT_EQ(ss.str().find('\r'), std::string::npos);
  const Matrix b = read_csv(ss);
  EXPECT_EQ(a, b);
}

TEST(Matrix, CsvRejectsRaggedRows) {
  std::stringstream ss("1,2,3\n4,5\n");
  EXPECT_THROW(read_csv(ss), DimensionError);
  std::stringstream bad("1,x\n");
  EXPECT_THROW(read_csv(bad), DomainError);
}

// ---------------------------------------------------------------- bidiagonalize

TEST(Bidiagonalize, FixedPointOnNonnegativeBidiagonal) {
  const Matrix a{{2.0, 0.0, 0.0, 0.0}, {0.5, 3.0, 0.0, 0.0}, {0.0, 1.5, 0.25, 0.0}};
  const BidiagonalForm y = bidiagonalize(a);
  EXPECT_EQ(y.diagonal, (Vector{2.0, 3.0, 0.25}));
  EXPECT_EQ(y.subdiagonal, (Vector{0.5, 1.5}));
  EXPECT_EQ(y.cols, 4u);
}

TEST(Bidiagonalize, SingleRowGivesItsNorm) {
  const BidiagonalForm y = bidiagonalize(Matrix{{3.0, 4.0}});
  ASSERT_EQ(y.diagonal.size(), 1u);
  EXPECT_NEAR(y.diagonal[0], 5.0, 1e-15);
  EXPECT_TRUE(y.subdiagonal.empty());
}

TEST(Bidiagonalize, MatchesCubicEigenOracle) {
  const Matrix a = random_matrix(3, 5, 7);
  const BidiagonalForm y = bidiagonalize(a);
  for (double v : y.diagonal) EXPECT_GE(v, 0.0);
  for (double w : y.subdiagonal) EXPECT_GE(w, 0.0);
  const auto expected = oracle::singular_values(to_dense(a));
  const auto got = singular_values(y);
  ASSERT_EQ(expected.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], expected[i], tol_svd(3, 5) * expected[0]);
}

TEST(Bidiagonalize, RejectsTallInput) { EXPECT_THROW(bidiagonalize(Matrix(3, 2)), DimensionError); }

TEST(Bidiagonalize, PreservesSpectrumAcrossShapes) {
  for (std::size_t m = 1; m <= 6; ++m) {
    for (std::size_t n = m; n <= m + 5; ++n) {
      const Matrix a = random_matrix(m, n, 100 * m + n);
      const BidiagonalForm y = bidiagonalize(a);
      const Vector s1 = singular_values(a);
      const Vector s2 = singular_values(y.to_matrix());
      for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(s1[i], s2[i], tol_svd(m, n) * s1[0]);
      EXPECT_NEAR(spectral_norm(a), spectral_norm(y), tol_svd(m, n) * s1[0]);
    }
  }
}

// ------------------------------------------------------------------------ svd

TEST(Svd, DiagonalAndRankOneCases) {
  EXPECT_EQ(svd(Matrix{{3.0, 0.0}, {0.0, 4.0}}).singular_values, (Vector{4.0, 3.0}));
  const Vector s = svd(Matrix{{1.0, 1.0}, {1.0, 1.0}}).singular_values;
  EXPECT_NEAR(s[0], 2.0, 1e-14);
  EXPECT_NEAR(s[1], 0.0, 1e-14);
}

TEST(Svd, TwoByFourMatchesQuadraticOracle) {
  const Matrix a = random_matrix(2, 4, 11);
  const SvdFactors f = svd(a);
  const auto expected = oracle::singular_values(to_dense(a));
  EXPECT_NEAR(f.singular_values[0], expected[0], 1e-12);
  EXPECT_NEAR(f.singular_values[1], expected[1], 1e-12);
  EXPECT_LE(frobenius_norm(reconstruct(f, 2, 4) - a), tol_svd(2, 4) * frobenius_norm(a));
}

TEST(Svd, FactorInvariantsOverShapes) {
  for (std::size_t m = 1; m <= 9; ++m) {
    for (std::size_t n = 1; n <= 9; ++n) {
      const Matrix a = random_matrix(m, n, 1000 + 10 * m + n);
      const SvdFactors f = svd(a);
      ASSERT_EQ(f.left_vectors.rows(), m);
      ASSERT_EQ(f.right_vectors.rows(), n);
      ASSERT_EQ(f.singular_values.size(), std::min(m, n));
      for (std::size_t i = 0; i + 1 < f.singular_values.size(); ++i)
        EXPECT_GE(f.singular_values[i], f.singular_values[i + 1]);
      EXPECT_GE(f.singular_values.back(), 0.0);
      EXPECT_LE(frobenius_norm(reconstruct(f, m, n) - a), tol_svd(m, n) * frobenius_norm(a));
      EXPECT_LE(orthogonality_defect(f.left_vectors), tol_svd(m, n));
      EXPECT_LE(orthogonality_defect(f.right_vectors), tol_svd(m, n));
    }
  }
}

TEST(Svd, HandlesRankDeficientAndZeroMatrices) {
  Matrix a = random_matrix(4, 6, 3);
  for (std::size_t j = 0; j < 6; ++j) a(3, j) = a(0, j) - 2.0 * a(1, j);
  const SvdFactors f = svd(a);
  EXPECT_LE(f.singular_values[3], 1e-13 * f.singular_values[0]);
  EXPECT_LE(frobenius_norm(reconstruct(f, 4, 6) - a), tol_svd(4, 6) * frobenius_norm(a));

  const SvdFactors z = svd(Matrix(3, 5));
  for (double s : z.singular_values) EXPECT_EQ(s, 0.0);
}

TEST(Svd, GradedAndClusteredSpectra) {
  // diag(1, 1e-5, 1e-10) between two rotations, and a nearly repeated pair.
  const Matrix q = svd(random_matrix(3, 3, 5)).left_vectors;
  for (const Vector& d : {Vector{1.0, 1e-5, 1e-10}, Vector{2.0, 1.0 + 1e-13, 1.0}}) {
    Matrix s(3, 3);
    for (int i = 0; i < 3; ++i) s(i, i) = d[i];
    const Matrix a = q * s * q.transpose();
    const Vector got = svd(a).singular_values;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], d[i], 1e-14 * d[0]);
  }
}

TEST(Svd, DeterministicAndSignCanonical) {
  const Matrix a = random_matrix(5, 3, 9);
  const SvdFactors f1 = svd(a);
  const SvdFactors f2 = svd(a);
  EXPECT_EQ(f1.left_vectors, f2.left_vectors);
  EXPECT_EQ(f1.right_vectors, f2.right_vectors);
  for (std::size_t j = 0; j < 5; ++j) {
    for (std::size_t i = 0; i < 5; ++i) {
      if (std::abs(f1.left_vectors(i, j)) > 1e-12) {
        EXPECT_GT(f1.left_vectors(i, j), 0.0);
        break;
      }
    }
  }
}

// --------------------------------------------------------------- spectral norm

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(Matrix{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}}), 2.0, 1e-15);
  EXPECT_NEAR(spectral_norm(Matrix::filled(2, 3, 1.0)), std::sqrt(6.0), 1e-14);
  const Matrix a = random_matrix(4, 7, 21);
  for (double c : {-3.5, 1e-3, 42.0}) {
    EXPECT_NEAR(spectral_norm(c * a), std::abs(c) * spectral_norm(a), 1e-12 * std::abs(c) * spectral_norm(a));
  }
}

// -------------------------------------------------------------- pseudo-inverse

TEST(PseudoInverse, DiagonalInversion) {
  const Matrix p = pseudo_inverse(Matrix{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}});
  const Matrix expected{{1.0, 0.0}, {0.0, 0.5}, {0.0, 0.0}};
  EXPECT_LE(frobenius_norm(p - expected), 1e-15);
}

TEST(PseudoInverse, OrthonormalRowsGiveTranspose) {
  const Matrix v = svd(random_matrix(5, 5, 4)).left_vectors;
  Matrix a(3, 5);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) a(i, j) = v(j, i);
  EXPECT_LE(frobenius_norm(pseudo_inverse(a) - a.transpose()), 1e-13);
}

TEST(PseudoInverse, MatchesCofactorGramOracle) {
  const Matrix a = random_matrix(3, 5, 13);
  const auto d = to_dense(a);
  const auto expected = oracle::multiply(oracle::transpose(d), oracle::cofactor_inverse(oracle::gram(d)));
  const Matrix p = pseudo_inverse(a);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p(i, j), expected[i][j], 1e-10);
}

TEST(PseudoInverse, MinimumNormPreimage) {
  const Matrix a = random_matrix(3, 6, 17);
  const Matrix p = pseudo_inverse(a);
  Rng rng(Seed{1, 1});
  Vector v{rng.normal(), rng.normal(), rng.normal()};
  const Vector w = p * v;
  const Vector aw = a * w;
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(aw[i], v[i], 1e-10);
  // Orthogonal to ker A: the trailing right singular vectors.
  const SvdFactors f = svd(a);
  for (std::size_t k = 3; k < 6; ++k) EXPECT_NEAR(dot(w, f.right_vectors.column(k)), 0.0, 1e-10);
}

TEST(PseudoInverse, RankDeficiencyReportsValues) {
  const Matrix a{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}};
  try {
    pseudo_inverse(a);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_LE(e.sigma_min(), 1e-14);
    EXPECT_NEAR(e.sigma_max(), std::sqrt(70.0), 1e-12);
  }
  EXPECT_THROW(condition_number(a), RankDeficientError);
}

TEST(PseudoInverse, MoorePenroseIdentitiesOnThousandMatrices) {
  std::size_t checked = 0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    Rng rng(Seed{77, trial});
    const std::size_t m = 1 + rng.next_u64() % 12;
    const std::size_t n = 1 + rng.next_u64() % 12;
    if (std::min(m, n) > 8) continue;
    Matrix a(m, n);
    for (double& x : a.data()) x = rng.normal();
    const double kappa = condition_number(a);
    const Matrix p = pseudo_inverse(a);
    ASSERT_EQ(p.rows(), n);
    EXPECT_LE(moore_penrose_residuals(a, p).max(), tol_mp(kappa)) << m << "x" << n;
    ++checked;
  }
  EXPECT_GT(checked, 800u);
}

// ------------------------------------------------------------ condition number

TEST(ConditionNumber, Examples) {
  Matrix i_pad(3, 5);
  for (std::size_t i = 0; i < 3; ++i) i_pad(i, i) = 1.0;
  EXPECT_NEAR(condition_number(i_pad), 1.0, 1e-15);
  EXPECT_NEAR(condition_number(Matrix{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}}), 2.0, 1e-15);
}

TEST(ConditionNumber, MatchesQuarticCharacteristicOracle) {
  const Matrix a = random_matrix(4, 6, 31);
  const auto s = oracle::singular_values(to_dense(a));
  ASSERT_EQ(s.size(), 4u);
  const double expected = s.front() / s.back();
  EXPECT_NEAR(condition_number(a), expected, 1e-9 * expected);
}

TEST(ConditionNumber, TransposeAndScaleInvariance) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng rng(Seed{5, t});
    const std::size_t m = 1 + rng.next_u64() % 8;
    const std::size_t n = m + rng.next_u64() % 8;
    Matrix a(m, n);
    for (double& x : a.data()) x = rng.normal();
    const double k = condition_number(a);
    EXPECT_GE(k, 1.0);
    EXPECT_NEAR(condition_number(a.transpose()), k, 1e-10 * k);
    for (double c : {1e-6, 1.0, 1e6}) EXPECT_NEAR(condition_number(c * a), k, 1e-10 * k);
  }
}

// --------------------------------------------------------------------- solves

TEST(LeastSquares, MeanOfObservations) {
  const Vector x = solve_least_squares(Matrix{{1.0}, {1.0}}, Vector{0.0, 2.0});
  ASSERT_EQ(x.size(), 1u);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
}

TEST(LeastSquares, ConsistentSystemIsExact) {
  const Matrix a = random_matrix(6, 3, 41);
  const Vector x0{1.0, -2.0, 0.5};
  const Vector x = solve_least_squares(a, a * x0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x[i], x0[i], 1e-12);
}

TEST(LeastSquares, MatchesNormalEquationOracle) {
  const Matrix a = random_matrix(5, 2, 43);
  Rng rng(Seed{3, 3});
  Vector b(5);
  for (double& v : b) v = rng.normal();
  const auto d = to_dense(a);
  const auto at = oracle::transpose(d);
  const auto inv = oracle::cofactor_inverse(oracle::gram(at));
  std::vector<double> atb(2, 0.0);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 5; ++i) atb[j] += d[i][j] * b[i];
  const Vector x = solve_least_squares(a, b);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(x[j], inv[j][0] * atb[0] + inv[j][1] * atb[1], 1e-12);
  // Residual orthogonal to the column space.
  Vector r = a * x;
  for (std::size_t i = 0; i < 5; ++i) r[i] -= b[i];
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(dot(r, a.column(j)), 0.0, 1e-12);
}

TEST(LeastSquares, Errors) {
  EXPECT_THROW(solve_least_squares(Matrix(2, 3), Vector{1.0, 2.0}), DimensionError);
  EXPECT_THROW(solve_least_squares(Matrix{{1.0}, {1.0}}, Vector{1.0}), DimensionError);
  EXPECT_THROW(solve_least_squares(Matrix{{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}}, Vector{1.0, 1.0, 1.0}),
               RankDeficientError);
}

TEST(MinNorm, Examples) {
  const Vector x = solve_min_norm(Matrix{{1.0, 1.0}}, Vector{2.0});
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
  const Vector y = solve_min_norm(Matrix{{1.0, 0.0, 0.0}}, Vector{3.0});
  EXPECT_EQ(y, (Vector{3.0, 0.0, 0.0}));
}

TEST(MinNorm, MatchesGramOracle) {
  const Matrix a = random_matrix(2, 5, 47);
  const Vector b{0.3, -1.7};
  const auto d = to_dense(a);
  const auto inv = oracle::cofactor_inverse(oracle::gram(d));
  const double y0 = inv[0][0] * b[0] + inv[0][1] * b[1];
  const double y1 = inv[1][0] * b[0] + inv[1][1] * b[1];
  const Vector x = solve_min_norm(a, b);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(x[j], d[0][j] * y0 + d[1][j] * y1, 1e-12);
  const Vector ax = a * x;
  EXPECT_NEAR(ax[0], b[0], 1e-12);
  EXPECT_NEAR(ax[1], b[1], 1e-12);
  EXPECT_THROW(solve_min_norm(Matrix(3, 2), Vector{1.0, 1.0, 1.0}), DimensionError);
}

// ------------------------------------------------------------- row complement

TEST(RowComplement, SmallExample) {
  const Matrix a{{1.0, 0.0, 0.0}, {0.0, 1.0, 1.0}};
  const RowComplement rc = row_complement(a);
  EXPECT_NEAR(rc.norm, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(rc.component[0], 0.0, 1e-15);
  EXPECT_NEAR(rc.component[1], 1.0, 1e-15);
  EXPECT_NEAR(rc.component[2], 1.0, 1e-15);
  // Pseudo-inverse oracle: A^+ e_2 = (0, 1/2, 1/2).
  const Vector w = pseudo_inverse(a) * unit_vector(2, 1);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
  EXPECT_NEAR(norm2(w), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(RowComplement, OrthogonalAndInsideSpan) {
  const Matrix orth{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 0.0, 3.0}};
  const RowComplement rc = row_complement(orth);
  EXPECT_EQ(rc.component, (Vector{0.0, 0.0, 3.0}));
  const Matrix inside{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {2.0, -3.0, 0.0}};
  EXPECT_NEAR(row_complement(inside).norm, 0.0, 1e-15);
}

TEST(RowComplement, DegenerateSpanThrows) {
  const Matrix a{{1.0, 2.0, 3.0, 4.0}, {2.0, 4.0, 6.0, 8.0}, {0.0, 1.0, 0.0, 0.0}};
  EXPECT_THROW(row_complement(a), DimensionError);
  EXPECT_THROW(row_complement(Matrix(3, 2)), DimensionError);
}

TEST(RowComplement, StarIdentityOnRandomMatrices) {
  for (std::uint64_t t = 0; t < 300; ++t) {
    Rng rng(Seed{8, t});
    const std::size_t m = 1 + rng.next_u64() % 8;
    const std::size_t n = m + rng.next_u64() % 8;
    Matrix a(m, n);
    for (double& x : a.data()) x = rng.normal();
    const double lhs = norm2(pseudo_inverse(a) * unit_vector(m, m - 1));
    EXPECT_NEAR(lhs * row_complement(a).norm, 1.0, 1e-8);
  }
}

// --------------------------------------------------------- sharpest direction

TEST(SharpestDirection, DiagonalExample) {
  const SharpestDirection d = sharpest_direction(Matrix{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}});
  EXPECT_NEAR(d.direction[0], 1.0, 1e-15);
  EXPECT_NEAR(d.direction[1], 0.0, 1e-15);
  EXPECT_FALSE(d.ambiguous);
}

TEST(SharpestDirection, RotatesWithTheRows) {
  const double th = 0.3;
  const Matrix phi{{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}};
  const Matrix a = phi * Matrix{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}};
  const SharpestDirection d = sharpest_direction(a);
  EXPECT_NEAR(d.direction[0], std::cos(th), 1e-14);
  EXPECT_NEAR(d.direction[1], std::sin(th), 1e-14);
}

TEST(SharpestDirection, FlagsRepeatedSmallestValue) {
  EXPECT_TRUE(sharpest_direction(Matrix{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}).ambiguous);
  EXPECT_THROW(sharpest_direction(Matrix(3, 2, {1, 0, 0, 1, 1, 1})), DimensionError);
}

TEST(SharpestDirection, LowerBoundOnDirectionalNorm) {
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(Seed{9, t});
    const std::size_t m = 2 + rng.next_u64() % 6;
    const std::size_t n = m + rng.next_u64() % 6;
    Matrix a(m, n);
    for (double& x : a.data()) x = rng.normal();
    const Matrix p = pseudo_inverse(a);
    const double pnorm = spectral_norm(p);
    const Vector u = sharpest_direction(a).direction;
    EXPECT_NEAR(norm2(p * u), pnorm, tol_svd(m, n) * pnorm);
    Vector v(m);
    for (double& x : v) x = rng.normal();
    const double vn = norm2(v);
    for (double& x : v) x /= vn;
    EXPECT_GE(norm2(p * v), pnorm * std::abs(dot(u, v)) * (1.0 - 1e-12));
  }
}
