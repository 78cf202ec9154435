#pragma once

#include <optional>
#include <string>

#include "infchain/orlicz.hpp"
#include "infchain/rng.hpp"

namespace infchain {

/// Scalar innovation catalogue shared by the model constructors and the
/// config layer: normal, uniform, bernoulli, poisson, constant. Closed-form
/// moments are exposed where they exist so norm computations can skip
/// Monte Carlo.
class Sampler {
 public:
  enum class Kind { Normal, Uniform, Bernoulli, Poisson, Constant };

  static Sampler normal(double mean = 0.0, double sd = 1.0);
  static Sampler uniform(double a, double b);
  static Sampler bernoulli(double p);
  static Sampler poisson(double mean);
  static Sampler constant(double value);

  double draw(Rng& rng) const;

  double mean() const;
  std::optional<double> abs_moment(double order) const;  // E|X|^order
  std::optional<double> density_sup() const;             // sup of the density, if absolutely continuous
  bool symmetric_about_zero() const;

  Kind kind() const { return kind_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }
  std::string describe() const;

 private:
  Sampler(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_, b_;
};

/// ||X||_Phi of the sampler's law in closed form where available:
/// Power(m) reduces to (E|X|^m)^{1/m}; constants work for every family.
std::optional<double> closed_orlicz_norm(const Sampler& sampler, const OrliczFunction& phi);

}  // namespace infchain
