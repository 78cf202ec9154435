#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "infchain/errors.hpp"

namespace infchain {

/// Nonnegative Lipschitz coefficient sequence (a_j)_{j>=1} with closed-form
/// total a = sum a_j and tails A(p) = sum_{j>p} a_j.
///
/// Kinds:
///   Finite(v_1..v_k)         a_j = v_j for j <= k, 0 beyond
///   Geometric(c, gamma)      a_j = c gamma^j,   0 < gamma < 1
///   Polynomial(c, beta)      a_j = c j^{-beta}, beta > 1
///
/// Geometric tails are exact; polynomial tails use the integral upper bracket
/// c p^{1-beta}/(beta-1) (capped at a), so every downstream bound that
/// consumes A(p) stays conservative. A(0) is always the exact total.
class CoefficientSequence {
 public:
  enum class Kind { Finite, Geometric, Polynomial };

  static CoefficientSequence finite(std::vector<double> values);
  static CoefficientSequence geometric(double c, double gamma);
  static CoefficientSequence polynomial(double c, double beta);

  double at(std::size_t j) const;  // a_j, j >= 1
  /// ln a_j computed in closed form, so it stays finite long after a_j itself
  /// underflows (-inf when a_j = 0).
  double log_at(std::size_t j) const;
  double sum() const { return sum_; }
  double tail(std::size_t p) const;  // A(p)

  bool finite_support() const { return kind_ == Kind::Finite; }
  /// Largest j with a_j > 0 for finite sequences (0 when all zero).
  std::size_t order() const;

  bool satisfies_contraction() const { return sum_ < 1.0; }

  CoefficientSequence scaled(double factor) const;

  Kind kind() const { return kind_; }
  double c() const { return c_; }
  double rate() const { return rate_; }  // gamma or beta
  const std::vector<double>& values() const { return values_; }
  std::string describe() const;

 private:
  CoefficientSequence() = default;

  Kind kind_ = Kind::Finite;
  std::vector<double> values_;
  double c_ = 0.0;
  double rate_ = 0.0;
  double sum_ = 0.0;
};

/// Riemann zeta for real s > 1 (direct sum plus Euler-Maclaurin tail),
/// accurate to ~1e-13 relative.
double zeta(double s);

}  // namespace infchain
