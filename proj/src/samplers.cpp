#include "infchain/samplers.hpp"

#include <cmath>
#include <numbers>

#include "infchain/csv.hpp"

namespace infchain {

namespace {
std::string format_param(double v) { return format_double(v); }
}  // namespace

Sampler Sampler::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw std::domain_error("Sampler::normal: sd must be > 0");
  return Sampler(Kind::Normal, mean, sd);
}

Sampler Sampler::uniform(double a, double b) {
  if (!(a < b)) throw std::domain_error("Sampler::uniform: need a < b");
  return Sampler(Kind::Uniform, a, b);
}

Sampler Sampler::bernoulli(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("Sampler::bernoulli: p must be in [0,1]");
  return Sampler(Kind::Bernoulli, p, 0.0);
}

Sampler Sampler::poisson(double mean) {
  if (mean < 0.0) throw std::domain_error("Sampler::poisson: mean must be >= 0");
  return Sampler(Kind::Poisson, mean, 0.0);
}

Sampler Sampler::constant(double value) { return Sampler(Kind::Constant, value, 0.0); }

double Sampler::draw(Rng& rng) const {
  switch (kind_) {
    case Kind::Normal:
      return a_ + b_ * rng.normal();
    case Kind::Uniform:
      return rng.uniform(a_, b_);
    case Kind::Bernoulli:
      return rng.bernoulli(a_) ? 1.0 : 0.0;
    case Kind::Poisson:
      return static_cast<double>(rng.poisson(a_));
    case Kind::Constant:
      return a_;
  }
  return 0.0;
}

double Sampler::mean() const {
  switch (kind_) {
    case Kind::Normal:
      return a_;
    case Kind::Uniform:
      return 0.5 * (a_ + b_);
    case Kind::Bernoulli:
    case Kind::Poisson:
    case Kind::Constant:
      return a_;
  }
  return 0.0;
}

std::optional<double> Sampler::abs_moment(double order) const {
  if (order < 0.0) throw std::domain_error("Sampler::abs_moment: order must be >= 0");
  if (order == 0.0) return 1.0;
  switch (kind_) {
    case Kind::Normal: {
      const double mu = a_, sd = b_;
      if (mu == 0.0) {
        // E|Z|^m = sd^m 2^{m/2} Gamma((m+1)/2) / sqrt(pi)
        return std::pow(sd, order) * std::pow(2.0, 0.5 * order) *
               std::tgamma(0.5 * (order + 1.0)) / std::sqrt(std::numbers::pi);
      }
      if (order == 1.0) {
        const double z = mu / sd;
        return sd * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * z * z) +
               mu * std::erf(z / std::numbers::sqrt2);
      }
      if (order == 2.0) return mu * mu + sd * sd;
      return std::nullopt;
    }
    case Kind::Uniform: {
      const auto anti = [order](double x) {
        return std::copysign(std::pow(std::abs(x), order + 1.0), x) / (order + 1.0);
      };
      return (anti(b_) - anti(a_)) / (b_ - a_);
    }
    case Kind::Bernoulli:
      return a_;
    case Kind::Poisson:
      if (order == 1.0) return a_;
      if (order == 2.0) return a_ + a_ * a_;
      return std::nullopt;
    case Kind::Constant:
      return std::pow(std::abs(a_), order);
  }
  return std::nullopt;
}

std::optional<double> Sampler::density_sup() const {
  switch (kind_) {
    case Kind::Normal:
      return 1.0 / (b_ * std::sqrt(2.0 * std::numbers::pi));
    case Kind::Uniform:
      return 1.0 / (b_ - a_);
    default:
      return std::nullopt;
  }
}

bool Sampler::symmetric_about_zero() const {
  switch (kind_) {
    case Kind::Normal:
      return a_ == 0.0;
    case Kind::Uniform:
      return a_ == -b_;
    case Kind::Constant:
      return a_ == 0.0;
    default:
      return false;
  }
}

std::string Sampler::describe() const {
  switch (kind_) {
    case Kind::Normal:
      return "normal(" + format_param(a_) + "," + format_param(b_) + ")";
    case Kind::Uniform:
      return "uniform(" + format_param(a_) + "," + format_param(b_) + ")";
    case Kind::Bernoulli:
      return "bernoulli(" + format_param(a_) + ")";
    case Kind::Poisson:
      return "poisson(" + format_param(a_) + ")";
    case Kind::Constant:
      return "constant(" + format_param(a_) + ")";
  }
  return "?";
}

std::optional<double> closed_orlicz_norm(const Sampler& sampler, const OrliczFunction& phi) {
  if (sampler.kind() == Sampler::Kind::Constant) {
    const double c = std::abs(sampler.param_a());
    return c == 0.0 ? 0.0 : c / phi.inverse(1.0);
  }
  if (phi.family() == OrliczFamily::Power) {
    const auto moment = sampler.abs_moment(phi.m());
    if (moment) return std::pow(*moment, 1.0 / phi.m());
  }
  return std::nullopt;
}

}  // namespace infchain
