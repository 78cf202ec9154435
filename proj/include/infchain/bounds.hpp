#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "infchain/coefficients.hpp"
#include "infchain/orlicz.hpp"

namespace infchain {

/// Closed-form bound on the dependence coefficient tau(r):
///   tau(r) <= 2 mu_1/(1-a) * inf_{1<=p<=r} ( a^{r/p} + A(p)/(1-a) ).
struct TauBound {
  std::size_t r = 0;
  double value = 0.0;
  std::size_t argmin_p = 1;
};

TauBound tau_bound(const CoefficientSequence& coeffs, double mu_1, std::size_t r);

/// Finite-memory specialization 2 mu_1 (1-a)^{-1} a^{r/p}, valid for r >= p.
double tau_bound_finite(std::size_t p, double a, double mu_1, std::size_t r);

/// Approximation error of the recursive scheme:
///   ||X~_r - X_r||_Phi <= (||X_0||_Phi + c_bar)/(1-a) * inf_{1<=p<=r}(...)
/// with the same inner infimum as tau_bound.
struct ApproxErrorBound {
  std::size_t r = 0;
  double value = 0.0;
  std::size_t argmin_p = 1;
};

ApproxErrorBound approx_error_bound(const CoefficientSequence& coeffs, double x0_norm_phi,
                                    double c_bar, std::size_t r);

/// Gap between consecutive truncation orders and the moment bound:
///   Delta_{Phi,p} <= a_{p+1} mu_Phi/(1-a)^2,   sup_p mu_{Phi,p} <= mu_Phi/(1-a).
struct TruncationGapBound {
  double delta_bound = 0.0;
  double mu_sup_bound = 0.0;
};

TruncationGapBound p_markov_gap_bound(const CoefficientSequence& coeffs, double mu_phi,
                                      std::size_t p);

/// Decay-rate envelope C * shape(r) calibrated so it dominates the exact
/// tau_bound over the calibration range [calib_lo, calib_hi] with the
/// smallest possible C (the rate statements leave the constant unspecified).
class RateEnvelope {
 public:
  enum class Shape { Geometric, Polynomial };

  double at(std::size_t r) const;
  double constant() const { return c_; }
  double shape_value(std::size_t r) const;
  /// The p the two-term tradeoff suggests at lag r:
  /// geometric: floor(sqrt(-ln(a) r / beta)); polynomial: largest p with
  /// p ln p (1-beta)/ln a <= r.
  std::size_t suggested_p(std::size_t r) const;

  Shape shape;
  double a = 0.0;     // summed coefficients
  double beta = 0.0;  // decay rate
  double c_ = 0.0;

 private:
  friend RateEnvelope tau_rate_geometric(const CoefficientSequence&, double, std::size_t,
                                         std::size_t);
  friend RateEnvelope tau_rate_polynomial(const CoefficientSequence&, double, std::size_t,
                                          std::size_t);
};

/// Envelope exp(-sqrt(-ln(a) beta r)) for geometric coefficients
/// a_j = c gamma^j (beta = -ln gamma).
RateEnvelope tau_rate_geometric(const CoefficientSequence& coeffs, double mu_1,
                                std::size_t calib_lo = 2, std::size_t calib_hi = 10000);

/// Envelope (ln r / r)^{beta-1} for polynomial coefficients a_j = c j^{-beta}.
RateEnvelope tau_rate_polynomial(const CoefficientSequence& coeffs, double mu_1,
                                 std::size_t calib_lo = 2, std::size_t calib_hi = 10000);

// ---------------------------------------------------------------------------
// Series conditions behind the limit theorems: convergence diagnostics for
//   sum_k a_k PhiTilde_q(arg_k)
// with arg_k = c0 k on the finite-support path and
// arg_k = -c0 k ln(sum_{j>=k} a_j) otherwise (switching back to c0 k once the
// tail hits zero).
// ---------------------------------------------------------------------------

enum class SeriesVerdict { Converges, Diverges, Inconclusive };

std::string to_string(SeriesVerdict v);

struct SeriesConditionReport {
  bool finite_support_path = false;  // which argument form was selected
  double c0 = 0.0;
  double q = 0.0;
  std::size_t terms = 0;
  double partial_sum = 0.0;
  double tail_slope = 0.0;  // fitted d ln t / d ln k over the last decade
  SeriesVerdict verdict = SeriesVerdict::Inconclusive;
  bool used_closed_form_bound = false;
  std::vector<double> term_values;  // for export; empty unless requested
};

/// Numeric convergence is undecidable, so the verdict is an explicit
/// heuristic: terms are summed (via the closed-form transform bound when the
/// family admits one, numeric supremum otherwise) and the log-log slope of
/// the last decade decides:
///   slope <= -1 - delta  -> Converges
///   slope >= -1 + delta  -> Diverges
///   otherwise            -> Inconclusive      (delta = 0.05)
/// growth_test = false skips the slope fit and reports only the partial sum.
SeriesConditionReport check_condition_dp(const OrliczFunction& phi, double q,
                                         const CoefficientSequence& coeffs, double c0,
                                         std::size_t terms = 10000, bool growth_test = true,
                                         bool keep_terms = false);

/// Scans c0 over a log grid (default 1e-3..1e3) and reports the most
/// favourable verdict; the conditions only require some c0 > 0 to work.
SeriesConditionReport check_condition_dp_scan(const OrliczFunction& phi, double q,
                                              const CoefficientSequence& coeffs,
                                              std::size_t terms = 10000);

/// Specialized argument forms for the two standard decay families:
///   PolynomialLogK:          a_k = c k^{-exponent},        arg_k = c0 k ln k
///   StretchedExponential(b): a_k = c exp(-exponent k^b),   arg_k = c0 k^{1+b}
enum class DecayFamily { PolynomialLogK, StretchedExponential };

struct DecayParams {
  double c = 1.0;
  double exponent = 1.0;
  double b = 1.0;  // only for StretchedExponential
};

SeriesConditionReport check_condition_specialized(const OrliczFunction& phi, double q,
                                                  DecayFamily family, const DecayParams& params,
                                                  double c0, std::size_t terms = 10000,
                                                  bool growth_test = true,
                                                  bool keep_terms = false);

}  // namespace infchain
