#include "infchain/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace infchain {

namespace {

struct InfScan {
  double value;
  std::size_t argmin_p;
};

// inf over integer p in [1, r] of a^{r/p} + A(p)/(1-a). The first term grows
// with p, so the scan can stop once it alone exceeds the current best.
InfScan inf_truncation_tradeoff(const CoefficientSequence& coeffs, std::size_t r) {
  const double a = coeffs.sum();
  const double inv_one_minus_a = 1.0 / (1.0 - a);
  InfScan best{std::numeric_limits<double>::infinity(), 1};
  for (std::size_t p = 1; p <= r; ++p) {
    const double geo = a == 0.0
                           ? 0.0
                           : std::exp(static_cast<double>(r) / static_cast<double>(p) * std::log(a));
    if (geo >= best.value) break;
    const double value = geo + coeffs.tail(p) * inv_one_minus_a;
    if (value < best.value) {
      best.value = value;
      best.argmin_p = p;
    }
  }
  return best;
}

void require_contractive(double a, const char* who) {
  if (!(a >= 0.0) || !(a < 1.0)) {
    throw std::domain_error(std::string(who) + ": need summed coefficients a in [0,1)");
  }
}

}  // namespace

TauBound tau_bound(const CoefficientSequence& coeffs, double mu_1, std::size_t r) {
  require_contractive(coeffs.sum(), "tau_bound");
  if (mu_1 < 0.0) throw std::domain_error("tau_bound: mu_1 must be >= 0");
  if (r == 0) throw std::domain_error("tau_bound: lags start at 1");
  const InfScan scan = inf_truncation_tradeoff(coeffs, r);
  return {r, 2.0 * mu_1 / (1.0 - coeffs.sum()) * scan.value, scan.argmin_p};
}

double tau_bound_finite(std::size_t p, double a, double mu_1, std::size_t r) {
  require_contractive(a, "tau_bound_finite");
  if (mu_1 < 0.0) throw std::domain_error("tau_bound_finite: mu_1 must be >= 0");
  if (p == 0 || r < p) throw std::domain_error("tau_bound_finite: need r >= p >= 1");
  const double geo =
      a == 0.0 ? 0.0 : std::exp(static_cast<double>(r) / static_cast<double>(p) * std::log(a));
  return 2.0 * mu_1 / (1.0 - a) * geo;
}

ApproxErrorBound approx_error_bound(const CoefficientSequence& coeffs, double x0_norm_phi,
                                    double c_bar, std::size_t r) {
  require_contractive(coeffs.sum(), "approx_error_bound");
  if (x0_norm_phi < 0.0 || c_bar < 0.0) {
    throw std::domain_error("approx_error_bound: norms must be >= 0");
  }
  if (r == 0) throw std::domain_error("approx_error_bound: lags start at 1");
  const InfScan scan = inf_truncation_tradeoff(coeffs, r);
  return {r, (x0_norm_phi + c_bar) / (1.0 - coeffs.sum()) * scan.value, scan.argmin_p};
}

TruncationGapBound p_markov_gap_bound(const CoefficientSequence& coeffs, double mu_phi,
                                      std::size_t p) {
  require_contractive(coeffs.sum(), "p_markov_gap_bound");
  if (mu_phi < 0.0) throw std::domain_error("p_markov_gap_bound: mu_phi must be >= 0");
  const double one_minus_a = 1.0 - coeffs.sum();
  return {coeffs.at(p + 1) * mu_phi / (one_minus_a * one_minus_a), mu_phi / one_minus_a};
}

double RateEnvelope::shape_value(std::size_t r) const {
  if (r < 2) throw std::domain_error("RateEnvelope: defined for r >= 2");
  const double rr = static_cast<double>(r);
  if (shape == Shape::Geometric) return std::exp(-std::sqrt(-std::log(a) * beta * rr));
  return std::pow(std::log(rr) / rr, beta - 1.0);
}

double RateEnvelope::at(std::size_t r) const { return c_ * shape_value(r); }

std::size_t RateEnvelope::suggested_p(std::size_t r) const {
  if (r < 2) throw std::domain_error("RateEnvelope: defined for r >= 2");
  if (shape == Shape::Geometric) {
    const double p = std::sqrt(-std::log(a) * static_cast<double>(r) / beta);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(p)));
  }
  // largest p with p ln p (1 - beta)/ln a <= r; the left side increases in p
  const double ratio = (1.0 - beta) / std::log(a);
  std::size_t lo = 1, hi = 2;
  const auto feasible = [&](std::size_t p) {
    return static_cast<double>(p) * std::log(static_cast<double>(p)) * ratio <=
           static_cast<double>(r);
  };
  while (feasible(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > (std::size_t{1} << 40)) break;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

namespace {

RateEnvelope calibrate_envelope(RateEnvelope envelope, const CoefficientSequence& coeffs,
                                double mu_1, std::size_t calib_lo, std::size_t calib_hi) {
  if (calib_lo < 2 || calib_hi < calib_lo) {
    throw std::domain_error("rate envelope: bad calibration range");
  }
  double c = 0.0;
  for (std::size_t r = calib_lo; r <= calib_hi; ++r) {
    const double exact = tau_bound(coeffs, mu_1, r).value;
    c = std::max(c, exact / envelope.shape_value(r));
  }
  envelope.c_ = c;
  return envelope;
}

}  // namespace

RateEnvelope tau_rate_geometric(const CoefficientSequence& coeffs, double mu_1,
                                std::size_t calib_lo, std::size_t calib_hi) {
  if (coeffs.kind() != CoefficientSequence::Kind::Geometric) {
    throw std::domain_error("tau_rate_geometric: needs geometric coefficients");
  }
  require_contractive(coeffs.sum(), "tau_rate_geometric");
  RateEnvelope env;
  env.shape = RateEnvelope::Shape::Geometric;
  env.a = coeffs.sum();
  env.beta = -std::log(coeffs.rate());
  return calibrate_envelope(env, coeffs, mu_1, calib_lo, calib_hi);
}

RateEnvelope tau_rate_polynomial(const CoefficientSequence& coeffs, double mu_1,
                                 std::size_t calib_lo, std::size_t calib_hi) {
  if (coeffs.kind() != CoefficientSequence::Kind::Polynomial) {
    throw std::domain_error("tau_rate_polynomial: needs polynomial coefficients");
  }
  require_contractive(coeffs.sum(), "tau_rate_polynomial");
  RateEnvelope env;
  env.shape = RateEnvelope::Shape::Polynomial;
  env.a = coeffs.sum();
  env.beta = coeffs.rate();
  return calibrate_envelope(env, coeffs, mu_1, calib_lo, calib_hi);
}

std::string to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Converges:
      return "converges";
    case SeriesVerdict::Diverges:
      return "diverges";
    case SeriesVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

constexpr double kSlopeMargin = 0.05;

// Transform evaluator in log space: the closed-form bound when the family
// supports it, the numeric supremum otherwise. Working with ln of the terms
// keeps the series diagnostics meaningful long after a_k * PhiTilde(arg_k)
// under- or overflows as a double.
struct TransformEvaluator {
  const OrliczFunction& phi;
  double q;
  bool closed;

  TransformEvaluator(const OrliczFunction& phi_in, double q_in) : phi(phi_in), q(q_in) {
    closed = (phi.family() == OrliczFamily::Power && phi.m() > q) ||
             (phi.family() == OrliczFamily::PowerLog && std::abs(phi.m() - q) < 1e-12 &&
              phi.m_prime() > 0.0);
  }

  // ln PhiTilde_q(x); -inf when the transform is 0, +inf when unbounded.
  double log_value(double x) const {
    if (x < 0.0) throw std::domain_error("series condition: negative transform argument");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    const double qm1 = q - 1.0;
    if (closed) {
      if (phi.family() == OrliczFamily::Power) {
        return (phi.m() - 1.0) * qm1 / (phi.m() - q) * std::log(x);
      }
      // PowerLog(q, m'): bound = (x L^{-1}(x^{q-1}))^{q-1} with
      // L^{-1}(z) = expm1(z^{1/m'} - 1); ln expm1(w) ~ w for large w.
      const double z_pow = std::pow(x, qm1 / phi.m_prime());
      const double w = z_pow - 1.0;
      if (w <= 0.0) return -std::numeric_limits<double>::infinity();
      const double log_l_inv = w > 40.0 ? w : std::log(std::expm1(w));
      return qm1 * (std::log(x) + log_l_inv);
    }
    try {
      const double value = phi_tilde_q(PhiTildeQuery(phi, q, x));
      return value > 0.0 ? std::log(value) : -std::numeric_limits<double>::infinity();
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  }
};

SeriesConditionReport finish_series(SeriesConditionReport report,
                                    const std::vector<double>& log_terms, bool growth_test,
                                    bool keep_terms) {
  report.terms = log_terms.size();
  double sum = 0.0;
  for (double lt : log_terms) sum += std::exp(lt);
  report.partial_sum = sum;

  bool any_infinite = false;
  for (double lt : log_terms) {
    if (lt == std::numeric_limits<double>::infinity()) any_infinite = true;
  }

  if (any_infinite) {
    report.verdict = SeriesVerdict::Diverges;
    report.tail_slope = std::numeric_limits<double>::infinity();
  } else if (report.finite_support_path) {
    // a finite sum always converges
    report.verdict = SeriesVerdict::Converges;
  } else if (!growth_test) {
    report.verdict = SeriesVerdict::Inconclusive;
  } else {
    // log-log slope over the last decade of terms
    const std::size_t n = log_terms.size();
    const std::size_t lo = std::max<std::size_t>(1, n / 10);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t k = lo; k <= n; ++k) {
      const double y = log_terms[k - 1];
      if (!std::isfinite(y)) continue;
      const double x = std::log(static_cast<double>(k));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
    }
    if (count == 0) {
      // every tail term is exactly zero
      report.verdict = SeriesVerdict::Converges;
      report.tail_slope = -std::numeric_limits<double>::infinity();
    } else if (count < 10) {
      report.verdict = SeriesVerdict::Inconclusive;
    } else {
      const double denom = count * sxx - sx * sx;
      const double slope = (count * sxy - sx * sy) / denom;
      report.tail_slope = slope;
      if (slope <= -1.0 - kSlopeMargin) {
        report.verdict = SeriesVerdict::Converges;
      } else if (slope >= -1.0 + kSlopeMargin) {
        report.verdict = SeriesVerdict::Diverges;
      } else {
        report.verdict = SeriesVerdict::Inconclusive;
      }
    }
  }
  if (keep_terms) {
    report.term_values.resize(log_terms.size());
    for (std::size_t i = 0; i < log_terms.size(); ++i) {
      report.term_values[i] = std::exp(log_terms[i]);
    }
  }
  return report;
}

}  // namespace

SeriesConditionReport check_condition_dp(const OrliczFunction& phi, double q,
                                         const CoefficientSequence& coeffs, double c0,
                                         std::size_t terms, bool growth_test, bool keep_terms) {
  if (!(q > 1.0)) throw std::domain_error("check_condition_dp: q must be > 1");
  if (!(c0 > 0.0)) throw std::domain_error("check_condition_dp: c0 must be > 0");
  if (terms == 0) throw std::domain_error("check_condition_dp: need terms >= 1");

  const TransformEvaluator transform(phi, q);
  SeriesConditionReport report;
  report.c0 = c0;
  report.q = q;
  report.used_closed_form_bound = transform.closed;
  report.finite_support_path = coeffs.finite_support();

  std::size_t n_terms = terms;
  if (report.finite_support_path) n_terms = std::max<std::size_t>(coeffs.order(), 1);

  std::vector<double> log_terms(n_terms, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 1; k <= n_terms; ++k) {
    const double log_a_k = coeffs.log_at(k);
    if (std::isinf(log_a_k)) continue;
    double arg;
    if (report.finite_support_path) {
      arg = c0 * static_cast<double>(k);
    } else {
      // sum_{j>=k} a_j = A(k-1); once the tail is zero the argument reverts
      // to the finite-support form
      const double tail = coeffs.tail(k - 1);
      arg = tail > 0.0 ? -c0 * static_cast<double>(k) * std::log(tail)
                       : c0 * static_cast<double>(k);
      if (arg < 0.0) {
        throw std::domain_error(
            "check_condition_dp: coefficient tail exceeds 1; the chain is not contractive");
      }
    }
    log_terms[k - 1] = log_a_k + transform.log_value(arg);
  }
  return finish_series(std::move(report), log_terms, growth_test, keep_terms);
}

SeriesConditionReport check_condition_dp_scan(const OrliczFunction& phi, double q,
                                              const CoefficientSequence& coeffs,
                                              std::size_t terms) {
  SeriesConditionReport best;
  bool have = false;
  for (int e = -3; e <= 3; ++e) {
    const double c0 = std::pow(10.0, e);
    SeriesConditionReport r = check_condition_dp(phi, q, coeffs, c0, terms, true, false);
    const auto rank = [](SeriesVerdict v) {
      return v == SeriesVerdict::Converges ? 2 : (v == SeriesVerdict::Inconclusive ? 1 : 0);
    };
    if (!have || rank(r.verdict) > rank(best.verdict)) {
      best = std::move(r);
      have = true;
    }
    if (best.verdict == SeriesVerdict::Converges) break;
  }
  return best;
}

SeriesConditionReport check_condition_specialized(const OrliczFunction& phi, double q,
                                                  DecayFamily family, const DecayParams& params,
                                                  double c0, std::size_t terms, bool growth_test,
                                                  bool keep_terms) {
  if (!(q > 1.0)) throw std::domain_error("check_condition_specialized: q must be > 1");
  if (!(c0 > 0.0)) throw std::domain_error("check_condition_specialized: c0 must be > 0");
  if (!(params.c > 0.0)) throw std::domain_error("check_condition_specialized: c must be > 0");
  if (terms == 0) throw std::domain_error("check_condition_specialized: need terms >= 1");
  if (family == DecayFamily::PolynomialLogK && !(params.exponent > 1.0)) {
    throw std::domain_error("check_condition_specialized: polynomial decay needs exponent > 1");
  }
  if (family == DecayFamily::StretchedExponential &&
      (!(params.exponent > 0.0) || params.b < 0.0)) {
    throw std::domain_error("check_condition_specialized: need exponent > 0 and b >= 0");
  }

  const TransformEvaluator transform(phi, q);
  SeriesConditionReport report;
  report.c0 = c0;
  report.q = q;
  report.used_closed_form_bound = transform.closed;
  report.finite_support_path = false;

  std::vector<double> log_terms(terms, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 1; k <= terms; ++k) {
    const double kk = static_cast<double>(k);
    double log_a_k, arg;
    if (family == DecayFamily::PolynomialLogK) {
      log_a_k = std::log(params.c) - params.exponent * std::log(kk);
      arg = c0 * kk * std::log(kk);
    } else {
      log_a_k = std::log(params.c) - params.exponent * std::pow(kk, params.b);
      arg = c0 * std::pow(kk, 1.0 + params.b);
    }
    log_terms[k - 1] = log_a_k + transform.log_value(arg);
  }
  return finish_series(std::move(report), log_terms, growth_test, keep_terms);
}

}  // namespace infchain
