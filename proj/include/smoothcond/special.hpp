#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "smoothcond/error.hpp"

namespace smoothcond::gamma_helper {

// ln Gamma(x) for x > 0 by the Lanczos approximation (g = 7, nine terms),
// with reflection below 1/2.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma needs finite x > 0");
  if (x < 0.5) {
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  static constexpr std::array<double, 9> kCoeff = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kG = 7.0;
  const double y = x - 1.0;
  double a = kCoeff[0];
  for (std::size_t i = 1; i < kCoeff.size(); ++i) a += kCoeff[i] / (y + static_cast<double>(i));
  const double t = y + kG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (y + 0.5) * std::log(t) - t + std::log(a);
}

// ln O_k, where O_k = 2 pi^{(k+1)/2} / Gamma((k+1)/2) is the volume of S^k in R^{k+1}.
inline double log_sphere_volume(int k) {
  if (k < 0) throw DomainError("sphere dimension must be >= 0");
  const double h = 0.5 * static_cast<double>(k + 1);
  return std::log(2.0) + h * std::log(std::numbers::pi) - log_gamma(h);
}

inline double sphere_volume(int k) { return std::exp(log_sphere_volume(k)); }

// E||Z|| for standard normal Z in R^m: sqrt(2) Gamma((m+1)/2) / Gamma(m/2).
inline double expected_chi(double m) {
  return std::sqrt(2.0) * std::exp(log_gamma(0.5 * (m + 1.0)) - log_gamma(0.5 * m));
}

}  // namespace smoothcond::gamma_helper
