#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infchain/errors.hpp"

namespace infchain {

enum class OrliczFamily { Power, PowerLog, Custom };

/// A convex increasing function with Phi(0) = 0 used to define the norm
/// ||X||_Phi = inf{ u > 0 : E Phi(|X|/u) <= 1 }.
///
/// The catalogue ships the two submultiplicative families
///   Power(m):          Phi(x) = x^m                       (m >= 1)
///   PowerLog(m, m'):   Phi(x) = x^m (1 + ln(1+x))^{m'}    (m >= 1, m' >= 0)
/// plus an extension hook for user evaluators. Closed-form transform bounds
/// are only available for the catalogued families.
class OrliczFunction {
 public:
  static OrliczFunction power(double m);
  static OrliczFunction power_log(double m, double m_prime);
  static OrliczFunction custom(std::string name, std::function<double(double)> evaluator);

  /// Evaluates Phi(x). Negative arguments are a domain error.
  double operator()(double x) const;

  /// Generalized inverse inf{ y >= 0 : Phi(y) >= z }; closed form for Power,
  /// numeric bracketing otherwise.
  double inverse(double z) const;

  OrliczFamily family() const { return family_; }
  double m() const { return m_; }
  double m_prime() const { return m_prime_; }
  const std::string& name() const { return name_; }

 private:
  OrliczFunction() = default;

  OrliczFamily family_ = OrliczFamily::Power;
  double m_ = 1.0;
  double m_prime_ = 0.0;
  std::function<double(double)> evaluator_;
  std::string name_;
};

struct SubmultiplicativityViolation {
  double x, y;
  double phi_xy, phi_x_phi_y;
};

struct SubmultiplicativityReport {
  bool ok = true;
  double worst_ratio = 0.0;  // max Phi(xy) / (Phi(x)Phi(y)) over the grid
  std::vector<SubmultiplicativityViolation> violations;
};

/// Checks Phi(x*y) <= Phi(x)*Phi(y) on grid x grid within relative tolerance
/// 1e-12. The grid must be nonempty with strictly positive entries.
SubmultiplicativityReport check_submultiplicative(const OrliczFunction& phi,
                                                  std::span<const double> grid);

/// Query for the transform  Phi~_q(x) = sup_{y>0} { (x y)^{q-1} - Phi(y)/y }.
/// q > 1 is enforced at construction.
struct PhiTildeQuery {
  PhiTildeQuery(OrliczFunction phi, double q, double x);

  OrliczFunction phi;
  double q;
  double x;
};

/// Numeric supremum of the transform: logarithmic grid scan over
/// y in [1e-8, 1e8] followed by golden-section refinement of the bracketing
/// interval. On the catalogued families the objective is unimodal and the
/// result is within relative 1e-6 of the true supremum; for custom families
/// the value is only a lower bound.
double phi_tilde_q(const PhiTildeQuery& query);

/// Closed-form upper bound on the transform via the generalized inverse of L
/// when Phi(x) = x^q L(x) with L increasing and nonnegative:
///   Power(m), m > q:      L(y) = y^{m-q}
///   PowerLog(q, m'):      L(y) = (1 + ln(1+y))^{m'}
/// Other inputs are a precondition error.
double phi_tilde_q_bound(const PhiTildeQuery& query);

/// The two loose specializations of the bound:
///   Power(m), m > q:                      x^{(m-1)(q-1)/(m-q)}
///   PowerLog(q, (1+b)(q-1)), b >= 0:      exp((q-1) x^{1/(1+b)}) x^{q-1}
double phi_tilde_q_bound_power(double m, double q, double x);
double phi_tilde_q_bound_power_log(double b, double q, double x);

/// Empirical Orlicz norm: the unique u > 0 with mean Phi(|x_i|/u) = 1, found
/// by bisection (relative tolerance 1e-10 on u). Returns 0 when every sample
/// is zero. Samples must be nonempty.
double estimate_orlicz_norm(std::span<const double> samples, const OrliczFunction& phi);

}  // namespace infchain
