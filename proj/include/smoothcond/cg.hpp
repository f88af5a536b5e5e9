#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "smoothcond/bounds.hpp"
#include "smoothcond/error.hpp"
#include "smoothcond/experiments.hpp"
#include "smoothcond/matrix.hpp"
#include "smoothcond/parallel.hpp"
#include "smoothcond/pinv.hpp"
#include "smoothcond/random.hpp"
#include "smoothcond/report.hpp"
#include "smoothcond/sampling.hpp"
#include "smoothcond/stats.hpp"

namespace smoothcond {

struct CgOptions {
  // When set, the stopping rule is ||P x - c|| / ||c|| <= eps / sqrt(kappa_estimate).
  std::optional<double> kappa_estimate;
  // Defaults to 4 * dim(P).
  std::optional<std::size_t> max_iter;
  // Enables CgRunStats::relative_error.
  std::optional<Vector> reference_solution;
};

struct CgRunStats {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  // ||r_k|| / ||c|| after each iteration, k >= 1
  std::vector<double> energy_history;    // (1/2) x_k^T P x_k - c^T x_k after each iteration
  bool converged = false;
  double cost_estimate = 0.0;  // 6 dim(P)^2 per iteration
  std::optional<double> relative_error;
};

struct CgResult {
  Vector x;
  CgRunStats stats;
};

inline double cg_cost_per_iteration(std::size_t dim) {
  const double d = static_cast<double>(dim);
  return 6.0 * d * d;
}

// Hestenes-Stiefel conjugate gradients from x_0 = 0. Hitting max_iter is not
// an error: the partial iterate is returned with converged = false.
inline CgResult cg_solve(const Matrix& p, std::span<const double> c, double eps, const CgOptions& opts = {}) {
  const std::size_t m = p.rows();
  if (p.cols() != m) throw DimensionError("cg_solve needs a square matrix");
  if (c.size() != m) throw DimensionError("right-hand side length does not match the matrix");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  double scale = 0.0;
  for (double x : p.data()) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (std::abs(p(i, j) - p(j, i)) > 1e-10 * scale)
        throw DomainError("cg_solve needs a symmetric matrix (entry " + std::to_string(i) + "," +
                          std::to_string(j) + " differs from its mirror)");
  double target = eps;
  if (opts.kappa_estimate) {
    if (!(*opts.kappa_estimate >= 1.0)) throw DomainError("kappa estimate must be >= 1");
    target = eps / std::sqrt(*opts.kappa_estimate);
  }
  const std::size_t max_iter = opts.max_iter.value_or(4 * m);

  CgResult out;
  out.x.assign(m, 0.0);
  CgRunStats& st = out.stats;
  const double cnorm = norm2(c);
  if (cnorm == 0.0) {
    st.converged = true;
  } else {
    Vector r(c.begin(), c.end());
    Vector dir = r;
    double rs = dot(r, r);
    double energy = 0.0;
    while (st.iterations < max_iter) {
      const Vector pd = p * dir;
      const double curvature = dot(dir, pd);
      if (!(curvature > 0.0)) {
        throw IndefiniteError("non-positive curvature p^T P p = " + format_double(curvature) + " at iteration " +
                              std::to_string(st.iterations + 1));
      }
      const double alpha = rs / curvature;
      for (std::size_t i = 0; i < m; ++i) {
        out.x[i] += alpha * dir[i];
        r[i] -= alpha * pd[i];
      }
      ++st.iterations;
      energy -= 0.5 * alpha * rs;
      st.energy_history.push_back(energy);
      const double rs_new = dot(r, r);
      const double rel = std::sqrt(rs_new) / cnorm;
      if (rel > 0.0) st.residual_history.push_back(rel);
      if (rel <= target) {
        st.converged = true;
        break;
      }
      const double beta = rs_new / rs;
      for (std::size_t i = 0; i < m; ++i) dir[i] = r[i] + beta * dir[i];
      rs = rs_new;
    }
  }
  st.cost_estimate = static_cast<double>(st.iterations) * cg_cost_per_iteration(m);
  if (opts.reference_solution) {
    const Vector& ref = *opts.reference_solution;
    if (ref.size() != m) throw DimensionError("reference solution length does not match the matrix");
    Vector diff(m);
    for (std::size_t i = 0; i < m; ++i) diff[i] = out.x[i] - ref[i];
    const double rn = norm2(ref);
    st.relative_error = rn > 0.0 ? norm2(diff) / rn : norm2(diff);
  }
  return out;
}

struct CgTrial {
  std::size_t trial_index = 0;
  double kappa_a = 0.0;
  double sqrt_kappa_p = 0.0;
  std::size_t iterations = 0;
  double iteration_bound = 0.0;  // (1/2) sqrt(kappa(P)) |ln eps| + 1
  bool converged = false;
  double relative_error = 0.0;
  double cost_estimate = 0.0;
};

// Solves A A^T x = c for sampled A with a random true solution. Checks
// sqrt(kappa(P)) = kappa(A) on every trial, the per-trial iteration bound, and
// the mean iteration count against (1/2)(20.1 / (1 - lambda)) |ln eps|.
inline ExperimentReport cg_experiment(const GaussianEnsemble& e, const std::string& center_name, double eps,
                                      std::size_t trials, Seed seed,
                                      bounds::LambdaMode mode = bounds::LambdaMode::asymptotic,
                                      std::size_t threads = default_thread_count()) {
  if (trials < 10) throw DomainError("cg_experiment needs at least 10 trials");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const std::size_t m = e.rows();
  const std::size_t n = e.cols();
  if (m > n) throw DomainError("cg_experiment needs m <= n");
  std::vector<CgTrial> rs(trials);
  std::vector<double> identity_dev(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    Rng rng(seed.child(i));
    const Matrix a = sample_gaussian_matrix(e, rng);
    Vector x_true(m);
    for (double& v : x_true) v = rng.normal();
    const Matrix p = gram_rows(a);
    const Vector c = p * x_true;
    CgTrial t;
    t.trial_index = i;
    t.kappa_a = condition_number(a);
    t.sqrt_kappa_p = std::sqrt(condition_number(p));
    identity_dev[i] = std::abs(t.sqrt_kappa_p - t.kappa_a) / t.kappa_a;
    CgOptions opts;
    opts.kappa_estimate = t.sqrt_kappa_p * t.sqrt_kappa_p;
    opts.reference_solution = x_true;
    const CgResult r = cg_solve(p, c, eps, opts);
    t.iterations = r.stats.iterations;
    t.iteration_bound = bounds::cg_iteration_bound(*opts.kappa_estimate, eps) + 1.0;
    t.converged = r.stats.converged;
    t.relative_error = r.stats.relative_error.value_or(0.0);
    t.cost_estimate = r.stats.cost_estimate;
    rs[i] = t;
  });

  ExperimentReport rep;
  rep.command = "cg-bench";
  std::vector<double> iters(trials);
  std::size_t over_bound = 0, not_converged = 0;
  Json per_trial = Json::array();
  for (const auto& t : rs) {
    iters[t.trial_index] = static_cast<double>(t.iterations);
    over_bound += static_cast<double>(t.iterations) > t.iteration_bound ? 1 : 0;
    not_converged += t.converged ? 0 : 1;
    per_trial.push_back(Json{{"trial", t.trial_index},
                             {"kappa_a", t.kappa_a},
                             {"sqrt_kappa_p", t.sqrt_kappa_p},
                             {"iterations", t.iterations},
                             {"iteration_bound", t.iteration_bound},
                             {"converged", t.converged},
                             {"relative_error", t.relative_error},
                             {"cost_estimate", t.cost_estimate}});
  }
  const auto me = stats::mean_and_se(iters);
  const double lambda = bounds::elongation(m, n, mode);
  const double expected_bound = 0.5 * bounds::expectation_bound(lambda).value * std::abs(std::log(eps));
  const double max_dev = *std::max_element(identity_dev.begin(), identity_dev.end());

  rep.results = Json{{"mean_iterations", me.mean},
                     {"standard_error", me.standard_error},
                     {"expected_iteration_bound", expected_bound},
                     {"lambda", lambda},
                     {"not_converged", not_converged},
                     {"trials", per_trial}};
  rep.verdicts.push_back({"sqrt(kappa(A A^T)) = kappa(A) (max relative deviation)", max_dev, "<=", 1e-8,
                          max_dev <= 1e-8, std::to_string(trials) + " trials"});
  rep.verdicts.push_back({"every solve converged within max_iter", static_cast<double>(not_converged), "==", 0.0,
                          not_converged == 0, ""});
  rep.verdicts.push_back({"iterations <= (1/2) sqrt(kappa(P)) |ln eps| + 1 (trials over bound)",
                          static_cast<double>(over_bound), "==", 0.0, over_bound == 0, ""});
  rep.verdicts.push_back({"mean iterations <= (1/2)(20.1/(1-lambda)) |ln eps|", me.mean, "<=", expected_bound,
                          me.mean - stats::kSlackSigmas * me.standard_error <= expected_bound,
                          "one-sided, 3 standard errors"});
  rep.config = Json{{"m", m},
                    {"n", n},
                    {"sigma", e.sigma()},
                    {"center", center_name},
                    {"eps", eps},
                    {"trials", trials},
                    {"seed", seed_json(seed)},
                    {"lambda_mode", bounds::to_string(mode)}};
  return rep;
}

}  // namespace smoothcond
