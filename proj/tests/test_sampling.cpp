#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "smoothcond/experiments.hpp"
#include "smoothcond/pinv.hpp"
#include "smoothcond/random.hpp"
#include "smoothcond/sampling.hpp"
#include "smoothcond/stats.hpp"

using namespace smoothcond;

TEST(Seed, ChildStreamsAreDistinctAndStable) {
  const Seed s{42, 0};
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(s.child(i).stream_index);
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(s.child(17), s.child(17));
  EXPECT_NE(Seed(1, 0).generator_seed(), Seed(2, 0).generator_seed());
}

TEST(Rng, UniformStaysInsideOpenInterval) {
  Rng rng(Seed{1, 2});
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, FixedSeedReproducesBitForBit) {
  Rng a(Seed{9, 3});
  Rng b(Seed{9, 3});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(GaussianEnsemble, RejectsNegativeOrNonFiniteSigma) {
  EXPECT_THROW(GaussianEnsemble(Matrix(2, 3), -1.0), DomainError);
  EXPECT_THROW(GaussianEnsemble(Matrix(2, 3), std::nan("")), DomainError);
  EXPECT_TRUE(GaussianEnsemble(Matrix(2, 3), 0.5).in_theorem_regime());
  EXPECT_FALSE(GaussianEnsemble(Matrix(2, 3), 2.0).in_theorem_regime());
  EXPECT_FALSE(GaussianEnsemble(Matrix(2, 3), 0.0).in_theorem_regime());
}

TEST(SampleGaussianMatrix, ZeroSigmaReturnsCenter) {
  const Matrix c{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  EXPECT_EQ(sample_gaussian_matrix(GaussianEnsemble(c, 0.0), Seed{1, 1}), c);
}

TEST(SampleGaussianMatrix, SameSeedSameMatrix) {
  const auto e = GaussianEnsemble::standard(4, 6);
  EXPECT_EQ(sample_gaussian_matrix(e, Seed{5, 8}), sample_gaussian_matrix(e, Seed{5, 8}));
  EXPECT_NE(sample_gaussian_matrix(e, Seed{5, 8}), sample_gaussian_matrix(e, Seed{5, 9}));
}

TEST(SampleGaussianMatrix, ScalarMoments) {
  const std::size_t draws = 100000;
  const auto e = GaussianEnsemble::standard(1, 1);
  std::vector<double> xs(draws);
  for (std::size_t i = 0; i < draws; ++i) xs[i] = sample_gaussian_matrix(e, Seed{11, 0}.child(i))(0, 0);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= draws;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= draws - 1;
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(static_cast<double>(draws)));
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(SampleGaussianMatrix, CenterAndScaleAreApplied) {
  const Matrix c = Matrix::filled(3, 4, 2.0);
  const auto x = sample_gaussian_matrix(GaussianEnsemble::standard(3, 4), Seed{3, 3});
  const auto y = sample_gaussian_matrix(GaussianEnsemble(c, 0.5), Seed{3, 3});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(y(i, j), 2.0 + 0.5 * x(i, j));
}

TEST(SampleChi, SecondMomentEqualsDegrees) {
  // 100 exercises the gamma branch.
  for (std::size_t k : {1u, 5u, 50u, 100u}) {
    Rng rng(Seed{21, k});
    double s = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      const double r = sample_chi(k, rng);
      ASSERT_GE(r, 0.0);
      s += r * r;
    }
    EXPECT_NEAR(s / draws / static_cast<double>(k), 1.0, 0.05) << "k=" << k;
  }
}

TEST(SampleChi, OneDegreeMeanIsHalfNormalMean) {
  Rng rng(Seed{22, 0});
  double s = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) s += sample_chi(1, rng);
  EXPECT_NEAR(s / draws, std::sqrt(2.0 / std::numbers::pi), 0.02 * std::sqrt(2.0 / std::numbers::pi));
}

TEST(SampleChi, MeanBelowRootDegrees) {
  for (std::size_t k = 1; k <= 50; ++k) {
    Rng rng(Seed{23, k});
    double s = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) s += sample_chi(k, rng);
    EXPECT_LE(s / draws, std::sqrt(static_cast<double>(k))) << "k=" << k;
  }
}

TEST(SampleChi, GammaBranchMatchesSumOfSquares) {
  // k = 80 through both constructions: gamma-based vs an explicit 80-term sum.
  const std::size_t k = 80, draws = 5000;
  std::vector<double> via_gamma(draws), via_sum(draws);
  Rng a(Seed{24, 0});
  Rng b(Seed{24, 1});
  for (std::size_t i = 0; i < draws; ++i) {
    via_gamma[i] = sample_chi(k, a);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double z = b.normal();
      s += z * z;
    }
    via_sum[i] = std::sqrt(s);
  }
  EXPECT_LT(stats::ks_statistic(via_gamma, via_sum), stats::ks_critical_value(draws, draws, 0.01));
}

TEST(SampleChi, RejectsZeroDegrees) {
  Rng rng(Seed{1, 1});
  EXPECT_THROW(sample_chi(0, rng), DomainError);
}

TEST(SampleBidiagonalModel, SingleRowIsChiN) {
  const auto y = sample_bidiagonal_model(1, 7, Seed{30, 0});
  EXPECT_EQ(y.diagonal.size(), 1u);
  EXPECT_TRUE(y.subdiagonal.empty());
  EXPECT_EQ(y.cols, 7u);
  EXPECT_EQ(y.diagonal[0], sample_chi(7, Seed{30, 0}));
  EXPECT_THROW(sample_bidiagonal_model(4, 3, Seed{30, 0}), DimensionError);
}

TEST(SampleBidiagonalModel, NormMatchesDenseGaussianInDistribution) {
  const std::size_t m = 10, n = 15, draws = 5000;
  std::vector<double> dense(draws), model(draws);
  const auto e = GaussianEnsemble::standard(m, n);
  for (std::size_t i = 0; i < draws; ++i) {
    dense[i] = spectral_norm(sample_gaussian_matrix(e, Seed{31, 0}.child(i)));
    model[i] = spectral_norm(sample_bidiagonal_model(m, n, Seed{31, 1}.child(i)));
  }
  EXPECT_LT(stats::ks_statistic(dense, model), stats::ks_critical_value(draws, draws, 0.01));
}

TEST(SampleBidiagonalModel, MeanNormAgreesWithDenseQEstimate) {
  const std::size_t m = 10, n = 15;
  const auto dense = experiments::estimate_Q(m, n, 5000, Seed{32, 0}, experiments::QMethod::dense, 1);
  const auto model = experiments::estimate_Q(m, n, 5000, Seed{32, 1}, experiments::QMethod::bidiagonal, 1);
  EXPECT_NEAR(model.estimate / dense.estimate, 1.0, 0.02);
}

TEST(SampleUnitSphere, UnitNormAndCenteredCoordinates) {
  const std::size_t m = 5, draws = 100000;
  std::vector<double> sums(m, 0.0);
  Rng rng(Seed{40, 0});
  for (std::size_t i = 0; i < draws; ++i) {
    const Vector v = sample_unit_sphere(m, rng);
    ASSERT_NEAR(norm2(v), 1.0, 1e-12);
    for (std::size_t j = 0; j < m; ++j) sums[j] += v[j];
  }
  for (double s : sums) EXPECT_LT(std::abs(s / draws), 4.0 / std::sqrt(static_cast<double>(draws * m)));
}

TEST(SampleUnitSphere, CircleArcProbabilityIsOneHalf) {
  // On S^1, |u^T v| >= sqrt(2)/2 covers arc length 2 arccos(xi) / pi = 1/2.
  const std::size_t draws = 100000;
  const double xi = std::sqrt(2.0) / 2.0;
  Rng rng(Seed{41, 0});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) hits += std::abs(sample_unit_sphere(2, rng)[0]) >= xi ? 1 : 0;
  const auto ci = stats::wilson_interval(hits, draws, 3.0);
  EXPECT_LE(ci.lower, 0.5);
  EXPECT_GE(ci.upper, 0.5);
}

TEST(SampleUnitSphere, OneDimensionalSphereIsPlusMinusOne) {
  Rng rng(Seed{42, 0});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(std::abs(sample_unit_sphere(1, rng)[0]), 1.0);
  EXPECT_THROW(sample_unit_sphere(0, rng), DomainError);
}
