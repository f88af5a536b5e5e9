#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "smoothcond/error.hpp"
#include "smoothcond/special.hpp"

// Closed-form quantities around the smoothed condition number of rectangular
// matrices. Everything here is deterministic; natural logarithms throughout
// except lop_bound, which counts decimal digits.
namespace smoothcond::bounds {

// theorem: lambda = (m-1)/n, so that (1 - lambda) n = n - m + 1.
// asymptotic: lambda = m/n, the convention of the published simulation tables.
enum class LambdaMode { theorem, asymptotic };

inline const char* to_string(LambdaMode mode) {
  return mode == LambdaMode::theorem ? "theorem" : "asymptotic";
}

inline LambdaMode lambda_mode_from_string(const std::string& s) {
  if (s == "theorem") return LambdaMode::theorem;
  if (s == "asymptotic") return LambdaMode::asymptotic;
  throw DomainError("unknown lambda mode '" + s + "' (expected theorem|asymptotic)");
}

inline double elongation(std::size_t m, std::size_t n, LambdaMode mode) {
  if (m < 1 || n < 1 || m > n) throw DomainError("elongation needs 1 <= m <= n");
  const double num = mode == LambdaMode::theorem ? static_cast<double>(m - 1) : static_cast<double>(m);
  const double lambda = num / static_cast<double>(n);
  if (!(lambda < 1.0)) throw DomainError("elongation must be < 1 (m = n in asymptotic mode)");
  return lambda;
}

struct BoundContext {
  std::size_t m = 1;
  std::size_t n = 1;
  double sigma = 1.0;
  LambdaMode lambda_mode = LambdaMode::theorem;
  double q_value = 1.0;

  double lambda() const { return elongation(m, n, lambda_mode); }
  // n - m + 1: the codimension of the rank-deficient matrices.
  double codim() const { return static_cast<double>(n - m + 1); }

  void validate() const {
    if (m < 1 || n < 1 || m > n) throw DomainError("bound context needs 1 <= m <= n");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be finite and > 0");
    if (!(q_value > 0.0) || !std::isfinite(q_value)) throw DomainError("q_value must be finite and > 0");
    (void)lambda();
  }
};

namespace detail {
inline void require_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw DomainError("lambda must lie in [0, 1), got " + std::to_string(lambda));
  }
}
inline void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(name) + " must be finite and > 0");
}
}  // namespace detail

// c(lambda) = sqrt((1 + lambda) / (2 (1 - lambda)))
inline double c_lambda(double lambda) {
  detail::require_lambda(lambda);
  return std::sqrt((1.0 + lambda) / (2.0 * (1.0 - lambda)));
}

// Threshold above which the tail bound on kappa is asserted:
// (Q + 1/(sigma sqrt n)) c(lambda)^{1/(n-m+1)}.
inline double zeta(const BoundContext& ctx) {
  ctx.validate();
  const double rn = std::sqrt(static_cast<double>(ctx.n));
  return (ctx.q_value + 1.0 / (ctx.sigma * rn)) * std::pow(c_lambda(ctx.lambda()), 1.0 / ctx.codim());
}

// Upper bound on P{ kappa(A) >= e z / (1 - lambda) } for A ~ N(Abar, sigma^2 I),
// ||Abar|| <= 1, 0 < sigma <= 1, z >= zeta:
//   2 c(lambda) [ (Q + sqrt(2 ln 2z) + 1/(sigma sqrt n)) / z ]^{n-m+1}.
// Natural log of the bound, finite for any admissible input.
inline double log_theorem_tail_bound(const BoundContext& ctx, double z) {
  ctx.validate();
  if (!(ctx.sigma <= 1.0)) {
    throw HypothesisError("tail theorem requires 0 < sigma <= 1, got " + std::to_string(ctx.sigma));
  }
  const double threshold = zeta(ctx);
  if (!(z >= threshold)) {
    throw HypothesisError("tail theorem requires z >= zeta = " + std::to_string(threshold) +
                          ", got " + std::to_string(z));
  }
  const double rn = std::sqrt(static_cast<double>(ctx.n));
  const double bracket = (ctx.q_value + std::sqrt(2.0 * std::log(2.0 * z)) + 1.0 / (ctx.sigma * rn)) / z;
  return std::log(2.0 * c_lambda(ctx.lambda())) + ctx.codim() * std::log(bracket);
}

// exp of the above; +inf only when the bound itself exceeds the double range.
inline double theorem_tail_bound(const BoundContext& ctx, double z) {
  return std::exp(log_theorem_tail_bound(ctx, z));
}

// Upper bound on P{ ||A^+|| >= t / (1 - lambda) }: c(lambda) (e / (sigma sqrt(n) t))^{(1-lambda) n}.
// No restriction on sigma or the center.
inline double pinv_tail_bound(const BoundContext& ctx, double t) {
  ctx.validate();
  detail::require_positive(t, "t");
  const double lambda = ctx.lambda();
  const double n = static_cast<double>(ctx.n);
  const double exponent = (1.0 - lambda) * n;
  return std::exp(std::log(c_lambda(lambda)) +
                  exponent * (1.0 - std::log(ctx.sigma * std::sqrt(n) * t)));
}

// Upper bound on P{ ||A^+ v|| >= xi } for any unit v and any center:
//   (2 pi)^{-(n-m+1)/2} O_{n-m} / (n-m+1) (sigma xi)^{-(n-m+1)}, as a natural log.
inline double log_pinv_directional_tail_bound(std::size_t m, std::size_t n, double sigma, double xi) {
  if (m < 1 || m > n) throw DomainError("directional bound needs 1 <= m <= n");
  detail::require_positive(sigma, "sigma");
  detail::require_positive(xi, "xi");
  const double p = static_cast<double>(n - m + 1);
  return -0.5 * p * std::log(2.0 * std::numbers::pi) + gamma_helper::log_sphere_volume(static_cast<int>(n - m)) -
         std::log(p) - p * std::log(sigma * xi);
}

inline double pinv_directional_tail_bound(std::size_t m, std::size_t n, double sigma, double xi) {
  return std::exp(log_pinv_directional_tail_bound(m, n, sigma, xi));
}

struct Sandwich {
  double lower = 0.0;
  double upper = 0.0;
};

// Average-case sandwich for A ~ N(0, I), valid for x >= n - m + 1:
//   (2 pi)^{-1/2} (1/(5x))^{n-m+1} <= P{kappa >= x/(1-lambda)} <= (2 pi)^{-1/2} (7/x)^{n-m+1}.
// Both sides are clipped to [0, 1].
inline Sandwich chen_dongarra_bounds(std::size_t m, std::size_t n, double x) {
  if (m < 1 || m > n) throw DomainError("sandwich needs 1 <= m <= n");
  const double p = static_cast<double>(n - m + 1);
  if (!(x >= p) || !std::isfinite(x)) {
    throw HypothesisError("sandwich holds for x >= n - m + 1 = " + std::to_string(p) + ", got " +
                          std::to_string(x));
  }
  const double log_front = -0.5 * std::log(2.0 * std::numbers::pi);
  Sandwich s;
  s.lower = std::clamp(std::exp(log_front - p * std::log(5.0 * x)), 0.0, 1.0);
  s.upper = std::clamp(std::exp(log_front + p * std::log(7.0 / x)), 0.0, 1.0);
  return s;
}

// Almost-sure limit of kappa for standard Gaussian m_n x n with m_n / n -> lambda.
inline double edelman_limit(double lambda) {
  detail::require_lambda(lambda);
  const double r = std::sqrt(lambda);
  return (1.0 + r) / (1.0 - r);
}

// lim Q(m_n, n) = 1 + sqrt(lambda). lambda = 1 is accepted as the continuous
// extension; q_limit_is_extrapolation flags it.
inline double q_limit(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("q_limit needs lambda in [0, 1]");
  return 1.0 + std::sqrt(lambda);
}

inline bool q_limit_is_extrapolation(double lambda) { return lambda >= 1.0; }

inline constexpr double kQAbsoluteCap = 6.0;

// sqrt(n/(n+1)) <= Q(m, n) <= min(6, 2 (1 + sqrt(2 ln(2m - 1) / n) + 1/sqrt n)), n > 1.
inline Sandwich q_analytic_bounds(std::size_t m, std::size_t n) {
  if (n <= 1) throw DomainError("Q bounds need n > 1");
  if (m < 1 || m > n) throw DomainError("Q bounds need 1 <= m <= n");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  Sandwich s;
  s.lower = std::sqrt(nd / (nd + 1.0));
  s.upper = std::min(kQAbsoluteCap,
                     2.0 * (1.0 + std::sqrt(2.0 * std::log(2.0 * md - 1.0) / nd) + 1.0 / std::sqrt(nd)));
  return s;
}

inline constexpr double kExpectationConstant = 20.1;

struct ExpectationBound {
  double value = 0.0;      // 20.1 / (1 - lambda)
  double log_value = 0.0;  // ln of the above, comparable with averages of ln kappa
};

inline ExpectationBound expectation_bound(double lambda) {
  detail::require_lambda(lambda);
  const double v = kExpectationConstant / (1.0 - lambda);
  return {v, std::log(v)};
}

// z(eps) = (Q + sqrt((2/n) ln(1/eps)) + 1/(sigma sqrt n)) (c/eps)^{1/((1-lambda) n)}, eps in (0, 1].
// In theorem mode z(1) = zeta.
inline double z_of_eps(const BoundContext& ctx, double eps) {
  ctx.validate();
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
  const double lambda = ctx.lambda();
  const double n = static_cast<double>(ctx.n);
  const double exponent = 1.0 / ((1.0 - lambda) * n);
  const double front = ctx.q_value + std::sqrt((2.0 / n) * std::log(1.0 / eps)) +
                       1.0 / (ctx.sigma * std::sqrt(n));
  return front * std::exp(exponent * (std::log(c_lambda(lambda)) - std::log(eps)));
}

// The three r-independent terms of mu.
inline double mu_cdw_without_r(double m, double n, double sigma) {
  return std::log(m + sigma * m * std::sqrt(5.0 * n)) + std::log(2.35 / sigma) +
         std::sqrt(std::numbers::e * std::numbers::pi / 5.0);
}

// mu(m, n, sigma) = ln(m + sigma m sqrt(5n)) + ln(2.35 / sigma) + 1/r + sqrt(e pi / 5).
// r is not pinned down by the formula's source; callers pass it explicitly.
inline double mu_cdw(double m, double n, double sigma, double r) {
  detail::require_positive(m, "m");
  detail::require_positive(n, "n");
  detail::require_positive(sigma, "sigma");
  detail::require_positive(r, "r");
  return mu_cdw_without_r(m, n, sigma) + 1.0 / r;
}

// Loss of precision in decimal digits for a least-squares solve (m > n):
// log10(m n^{3/2}) + 2 log10 kappa + constant.
inline double lop_bound(std::size_t m, std::size_t n, double kappa, double constant = 0.0) {
  if (n < 1 || m <= n) throw DomainError("loss-of-precision bound needs m > n >= 1");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("kappa must be finite and >= 1");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return std::log10(md * std::pow(nd, 1.5)) + 2.0 * std::log10(kappa) + constant;
}

// Conjugate gradients reach relative accuracy eps within (1/2) sqrt(kappa) |ln eps| iterations.
inline double cg_iteration_bound(double kappa, double eps) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("kappa must be finite and >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  return 0.5 * std::sqrt(kappa) * std::abs(std::log(eps));
}

struct CgCost {
  double cost = 0.0;           // 3 n^2 (20.1 / (1 - lambda)) |ln eps| + linear_term
  double breakeven_eps = 0.0;  // exp(-n (1 - lambda) / 91)
};

inline CgCost cg_cost_and_breakeven(std::size_t n, double lambda, double eps, double linear_term = 0.0) {
  if (n < 1) throw DomainError("n must be >= 1");
  detail::require_lambda(lambda);
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const double nd = static_cast<double>(n);
  CgCost c;
  c.cost = 3.0 * nd * nd * (kExpectationConstant / (1.0 - lambda)) * std::abs(std::log(eps)) + linear_term;
  c.breakeven_eps = std::exp(-nd * (1.0 - lambda) / 91.0);
  return c;
}

// Operation count of dense Gaussian elimination, (2/3) n^3.
inline double gaussian_elimination_cost(std::size_t n) {
  const double nd = static_cast<double>(n);
  return 2.0 / 3.0 * nd * nd * nd;
}

struct LemmaCheck {
  std::string name;
  std::size_t points = 0;
  std::size_t failures = 0;
  double worst_margin = 0.0;  // min over the grid of (rhs - lhs) in the inequality's natural form
  bool pass() const { return failures == 0 && points > 0; }
};

// Grid checks of the scalar inequalities the proofs lean on.
inline std::vector<LemmaCheck> analytic_lemma_checks() {
  using gamma_helper::log_gamma;
  std::vector<LemmaCheck> out;
  auto record = [](LemmaCheck& c, double margin) {
    ++c.points;
    if (c.points == 1 || margin < c.worst_margin) c.worst_margin = margin;
    if (!(margin >= 0.0)) ++c.failures;
  };

  // lambda^{-lambda/(1-lambda)} <= e on (0, 1), step 1e-3.
  LemmaCheck power{"lambda^(-lambda/(1-lambda)) <= e"};
  for (int i = 1; i < 1000; ++i) {
    const double l = 1e-3 * i;
    record(power, 1.0 - (-l / (1.0 - l)) * std::log(l));  // compare logs: 1 - ln(lhs)
  }
  out.push_back(power);

  // Gamma(m/2) / Gamma((m+1)/2) >= sqrt(2/m), m = 1..500.
  LemmaCheck gine{"Gamma(m/2)/Gamma((m+1)/2) >= sqrt(2/m)"};
  for (int m = 1; m <= 500; ++m) {
    const double md = m;
    const double lhs = std::exp(log_gamma(0.5 * md) - log_gamma(0.5 * (md + 1.0)));
    record(gine, lhs - std::sqrt(2.0 / md));
  }
  out.push_back(gine);

  // E||Z|| >= m / sqrt(m+1), m = 1..500.
  LemmaCheck chi{"E||Z|| >= m/sqrt(m+1)"};
  for (int m = 1; m <= 500; ++m) {
    const double md = m;
    record(chi, gamma_helper::expected_chi(md) - md / std::sqrt(md + 1.0));
  }
  out.push_back(chi);

  // Gamma(x) > sqrt(2 pi / x) (x/e)^x on (0, 200], step 0.25, compared in logs.
  LemmaCheck stirling{"Gamma(x) > sqrt(2pi/x) (x/e)^x"};
  for (int i = 1; i <= 800; ++i) {
    const double x = 0.25 * i;
    const double rhs = 0.5 * std::log(2.0 * std::numbers::pi / x) + x * (std::log(x) - 1.0);
    const double margin = log_gamma(x) - rhs;
    ++stirling.points;
    if (stirling.points == 1 || margin < stirling.worst_margin) stirling.worst_margin = margin;
    if (!(margin > 0.0)) ++stirling.failures;
  }
  out.push_back(stirling);
  return out;
}

}  // namespace smoothcond::bounds
