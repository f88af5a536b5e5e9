#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smoothcond {

// Shape or size mismatch between operands, or a shape an operation does not accept.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of a closed-form evaluator or sampler.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A theorem was asked to speak outside the range where it makes a claim.
class HypothesisError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerically rank-deficient input. Carries the extreme singular values that decided it.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(double sigma_min, double sigma_max)
      : std::runtime_error("rank-deficient matrix: sigma_min = " + std::to_string(sigma_min) +
                           " <= rank_tol * sigma_max (sigma_max = " + std::to_string(sigma_max) +
                           ")"),
        sigma_min_(sigma_min),
        sigma_max_(sigma_max) {}

  double sigma_min() const noexcept { return sigma_min_; }
  double sigma_max() const noexcept { return sigma_max_; }

 private:
  double sigma_min_;
  double sigma_max_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t sweeps)
      : std::runtime_error(what + " (after " + std::to_string(sweeps) + " sweeps)"),
        sweeps_(sweeps) {}

  std::size_t sweeps() const noexcept { return sweeps_; }

 private:
  std::size_t sweeps_;
};

// Negative curvature p'Pp <= 0 met inside conjugate gradients.
class IndefiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace smoothcond
