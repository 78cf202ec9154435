#include "infchain/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infchain/csv.hpp"

namespace infchain {

double zeta(double s) {
  if (!(s > 1.0)) throw std::domain_error("zeta: need s > 1");
  constexpr int kTerms = 1 << 14;
  double acc = 0.0;
  for (int j = kTerms; j >= 1; --j) acc += std::pow(static_cast<double>(j), -s);
  const double n = kTerms + 1.0;
  // Euler-Maclaurin remainder from n on: integral + f(n)/2 - f'(n)/12
  acc += std::pow(n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(n, -s) + s * std::pow(n, -s - 1.0) / 12.0;
  return acc;
}

CoefficientSequence CoefficientSequence::finite(std::vector<double> values) {
  for (double v : values) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw std::domain_error("CoefficientSequence::finite: entries must be finite and >= 0");
    }
  }
  CoefficientSequence s;
  s.kind_ = Kind::Finite;
  s.values_ = std::move(values);
  s.sum_ = 0.0;
  for (double v : s.values_) s.sum_ += v;
  return s;
}

CoefficientSequence CoefficientSequence::geometric(double c, double gamma) {
  if (!(c > 0.0)) throw std::domain_error("CoefficientSequence::geometric: c must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::domain_error("CoefficientSequence::geometric: gamma must be in (0,1)");
  }
  CoefficientSequence s;
  s.kind_ = Kind::Geometric;
  s.c_ = c;
  s.rate_ = gamma;
  s.sum_ = c * gamma / (1.0 - gamma);
  return s;
}

CoefficientSequence CoefficientSequence::polynomial(double c, double beta) {
  if (!(c > 0.0)) throw std::domain_error("CoefficientSequence::polynomial: c must be > 0");
  if (!(beta > 1.0)) throw std::domain_error("CoefficientSequence::polynomial: beta must be > 1");
  CoefficientSequence s;
  s.kind_ = Kind::Polynomial;
  s.c_ = c;
  s.rate_ = beta;
  s.sum_ = c * zeta(beta);
  return s;
}

double CoefficientSequence::at(std::size_t j) const {
  if (j == 0) throw std::domain_error("CoefficientSequence::at: lags start at 1");
  switch (kind_) {
    case Kind::Finite:
      return j <= values_.size() ? values_[j - 1] : 0.0;
    case Kind::Geometric:
      return c_ * std::pow(rate_, static_cast<double>(j));
    case Kind::Polynomial:
      return c_ * std::pow(static_cast<double>(j), -rate_);
  }
  return 0.0;
}

double CoefficientSequence::log_at(std::size_t j) const {
  if (j == 0) throw std::domain_error("CoefficientSequence::log_at: lags start at 1");
  switch (kind_) {
    case Kind::Finite:
      return j <= values_.size() && values_[j - 1] > 0.0
                 ? std::log(values_[j - 1])
                 : -std::numeric_limits<double>::infinity();
    case Kind::Geometric:
      return std::log(c_) + static_cast<double>(j) * std::log(rate_);
    case Kind::Polynomial:
      return std::log(c_) - rate_ * std::log(static_cast<double>(j));
  }
  return -std::numeric_limits<double>::infinity();
}

double CoefficientSequence::tail(std::size_t p) const {
  if (p == 0) return sum_;
  switch (kind_) {
    case Kind::Finite: {
      double acc = 0.0;
      for (std::size_t j = p; j < values_.size(); ++j) acc += values_[j];
      return acc;
    }
    case Kind::Geometric:
      return c_ * std::pow(rate_, static_cast<double>(p + 1)) / (1.0 - rate_);
    case Kind::Polynomial:
      return std::min(sum_, c_ * std::pow(static_cast<double>(p), 1.0 - rate_) / (rate_ - 1.0));
  }
  return 0.0;
}

std::size_t CoefficientSequence::order() const {
  if (kind_ != Kind::Finite) return 0;
  for (std::size_t j = values_.size(); j > 0; --j) {
    if (values_[j - 1] > 0.0) return j;
  }
  return 0;
}

CoefficientSequence CoefficientSequence::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw std::domain_error("CoefficientSequence::scaled: factor must be finite and >= 0");
  }
  switch (kind_) {
    case Kind::Finite: {
      std::vector<double> v = values_;
      for (double& x : v) x *= factor;
      return finite(std::move(v));
    }
    case Kind::Geometric:
      if (factor == 0.0) return finite({});
      return geometric(c_ * factor, rate_);
    case Kind::Polynomial:
      if (factor == 0.0) return finite({});
      return polynomial(c_ * factor, rate_);
  }
  return finite({});
}

std::string CoefficientSequence::describe() const {
  switch (kind_) {
    case Kind::Finite: {
      std::string out = "finite(";
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) out += ",";
        out += format_double(values_[i]);
      }
      return out + ")";
    }
    case Kind::Geometric:
      return "geometric(" + format_double(c_) + "," + format_double(rate_) + ")";
    case Kind::Polynomial:
      return "polynomial(" + format_double(c_) + "," + format_double(rate_) + ")";
  }
  return "?";
}

}  // namespace infchain
