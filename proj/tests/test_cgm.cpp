#include <gtest/gtest.h>

#include <cmath>

#include "smoothcond/cg.hpp"

using namespace smoothcond;

namespace {

Matrix diagonal(const std::vector<double>& d) {
  Matrix p(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) p(i, i) = d[i];
  return p;
}

// Q diag(d) Q^T with Q from the SVD of a random square matrix.
Matrix rotated_spd(const std::vector<double>& d, Seed s) {
  const std::size_t m = d.size();
  const SvdFactors f = svd(sample_gaussian_matrix(GaussianEnsemble::standard(m, m), s));
  Matrix p = f.left_vectors * diagonal(d) * f.left_vectors.transpose();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) p(i, j) = p(j, i) = 0.5 * (p(i, j) + p(j, i));
  return p;
}

}  // namespace

TEST(CgSolve, IdentityConvergesInOneIteration) {
  const Vector c{3.0, -1.0, 2.0, 0.5};
  const auto r = cg_solve(Matrix::identity(4), c, 1e-10);
  EXPECT_EQ(r.stats.iterations, 1u);
  EXPECT_TRUE(r.stats.converged);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.x[i], c[i], 1e-15);
}

TEST(CgSolve, ThreeDistinctEigenvalues) {
  const auto r = cg_solve(diagonal({1.0, 2.0, 3.0}), Vector{1.0, 1.0, 1.0}, 1e-12);
  EXPECT_LE(r.stats.iterations, 3u);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.5, 1e-12);
  EXPECT_NEAR(r.x[2], 1.0 / 3.0, 1e-12);
}

TEST(CgSolve, FiniteTerminationWithKDistinctEigenvalues) {
  for (std::size_t k : {1u, 2u, 3u, 5u}) {
    std::vector<double> d(12);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 + static_cast<double>(i % k) * 1.7;
    for (bool rotate : {false, true}) {
      const Matrix p = rotate ? rotated_spd(d, Seed{50, k}) : diagonal(d);
      Vector c(d.size());
      Rng rng(Seed{51, k});
      for (double& x : c) x = rng.normal();
      const auto r = cg_solve(p, c, 1e-10);
      EXPECT_TRUE(r.stats.converged) << "k=" << k;
      EXPECT_LE(r.stats.iterations, k) << "k=" << k << " rotated=" << rotate;
      // an exactly zero final residual is not recorded
      EXPECT_TRUE(r.stats.residual_history.size() < r.stats.iterations || r.stats.residual_history.back() <= 1e-10);
    }
  }
}

TEST(CgSolve, ZeroRightHandSide) {
  const auto r = cg_solve(diagonal({2.0, 3.0}), Vector{0.0, 0.0}, 1e-6);
  EXPECT_TRUE(r.stats.converged);
  EXPECT_EQ(r.stats.iterations, 0u);
  EXPECT_EQ(r.x, (Vector{0.0, 0.0}));
  EXPECT_TRUE(r.stats.residual_history.empty());
}

TEST(CgSolve, Errors) {
  EXPECT_THROW(cg_solve(Matrix(2, 3), Vector{1.0, 1.0}, 1e-6), DimensionError);
  EXPECT_THROW(cg_solve(Matrix::identity(2), Vector{1.0}, 1e-6), DimensionError);
  EXPECT_THROW(cg_solve(Matrix::identity(2), Vector{1.0, 1.0}, 1.0), DomainError);
  EXPECT_THROW(cg_solve(Matrix{{1.0, 2.0}, {0.0, 1.0}}, Vector{1.0, 1.0}, 1e-6), DomainError);
  EXPECT_THROW(cg_solve(diagonal({1.0, -1.0}), Vector{0.0, 1.0}, 1e-6), IndefiniteError);
  EXPECT_THROW(cg_solve(diagonal({1.0, 0.0}), Vector{0.0, 1.0}, 1e-6), IndefiniteError);
}

TEST(CgSolve, MaxIterFlagsPartialResult) {
  std::vector<double> d(30);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::pow(1.5, static_cast<double>(i));
  CgOptions opts;
  opts.max_iter = 3;
  const auto r = cg_solve(diagonal(d), Vector(30, 1.0), 1e-12, opts);
  EXPECT_FALSE(r.stats.converged);
  EXPECT_EQ(r.stats.iterations, 3u);
  EXPECT_EQ(r.stats.residual_history.size(), 3u);
}

TEST(CgSolve, HistoriesPositiveAndEnergyNonincreasing) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const Matrix a = sample_gaussian_matrix(GaussianEnsemble::standard(15, 25), Seed{52, t});
    const Matrix p = gram_rows(a);
    Vector c(15);
    Rng rng(Seed{53, t});
    for (double& x : c) x = rng.normal();
    const auto r = cg_solve(p, c, 1e-10);
    ASSERT_EQ(r.stats.energy_history.size(), r.stats.iterations);
    for (double h : r.stats.residual_history) EXPECT_GT(h, 0.0);
    for (std::size_t k = 1; k < r.stats.energy_history.size(); ++k)
      EXPECT_LE(r.stats.energy_history[k], r.stats.energy_history[k - 1]);
    // recurrence energy matches (1/2) x^T P x - c^T x at the end
    const Vector px = p * r.x;
    const double direct = 0.5 * dot(r.x, px) - dot(c, r.x);
    EXPECT_NEAR(r.stats.energy_history.back(), direct, 1e-8 * std::abs(direct));
  }
}

TEST(CgSolve, CostIsSixDimSquaredPerIteration) {
  const auto r = cg_solve(diagonal({1.0, 2.0, 3.0, 4.0}), Vector{1.0, 1.0, 1.0, 1.0}, 1e-12);
  EXPECT_DOUBLE_EQ(r.stats.cost_estimate, static_cast<double>(r.stats.iterations) * 6.0 * 16.0);
}

TEST(CgSolve, KappaEstimateTightensStoppingRule) {
  const Matrix p = gram_rows(sample_gaussian_matrix(GaussianEnsemble::standard(30, 40), Seed{54, 0}));
  const Vector c(30, 1.0);
  CgOptions opts;
  opts.kappa_estimate = condition_number(p);
  const auto plain = cg_solve(p, c, 1e-4);
  const auto tight = cg_solve(p, c, 1e-4, opts);
  EXPECT_LE(plain.stats.iterations, tight.stats.iterations);
  EXPECT_LE(tight.stats.residual_history.back(), 1e-4 / std::sqrt(*opts.kappa_estimate));
  opts.kappa_estimate = 0.5;
  EXPECT_THROW(cg_solve(p, c, 1e-4, opts), DomainError);
}

TEST(CgSolve, IterationBoundOnRandomGram) {
  const std::size_t m = 20, n = 60;
  const double eps = 1e-8;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const Matrix a = sample_gaussian_matrix(GaussianEnsemble::standard(m, n), Seed{55, t});
    const Matrix p = gram_rows(a);
    Vector x(m);
    Rng rng(Seed{56, t});
    for (double& v : x) v = rng.normal();
    CgOptions opts;
    opts.kappa_estimate = condition_number(p);
    opts.reference_solution = x;
    const auto r = cg_solve(p, p * x, eps, opts);
    EXPECT_TRUE(r.stats.converged);
    EXPECT_LE(static_cast<double>(r.stats.iterations), bounds::cg_iteration_bound(*opts.kappa_estimate, eps) + 1.0);
    EXPECT_LT(*r.stats.relative_error, 1e-6);
  }
}

TEST(CgExperiment, OnesCenterTwentyBySixty) {
  const double sigma = 1.0 / std::sqrt(20.0);
  const GaussianEnsemble e(experiments::make_ones_center(20, 60, experiments::CenterScale::unit_norm), sigma);
  const auto rep = cg_experiment(e, "ones-unit", 1e-6, 50, Seed{57, 0}, bounds::LambdaMode::asymptotic, 1);
  for (const auto& v : rep.verdicts) EXPECT_TRUE(v.pass) << v.name << " " << v.lhs << " " << v.rhs;
  EXPECT_NEAR(rep.results["expected_iteration_bound"].get<double>(), 0.5 * 20.1 / (1.0 - 1.0 / 3.0) * std::log(1e6),
              1e-9);
  for (const auto& t : rep.results["trials"]) {
    EXPECT_DOUBLE_EQ(t["cost_estimate"].get<double>(), t["iterations"].get<double>() * 6.0 * 400.0);
    EXPECT_NEAR(t["sqrt_kappa_p"].get<double>() / t["kappa_a"].get<double>(), 1.0, 1e-8);
  }
  EXPECT_THROW(cg_experiment(e, "ones-unit", 1e-6, 9, Seed{57, 0}), DomainError);
}

TEST(CgExperiment, IndependentOfThreadCount) {
  const auto e = GaussianEnsemble::standard(10, 14);
  const auto a = cg_experiment(e, "zero", 1e-6, 30, Seed{58, 0}, bounds::LambdaMode::theorem, 1);
  const auto b = cg_experiment(e, "zero", 1e-6, 30, Seed{58, 0}, bounds::LambdaMode::theorem, 3);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}
