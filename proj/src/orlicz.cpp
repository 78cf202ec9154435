#include "infchain/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace infchain {

namespace {

constexpr double kYLo = 1e-8;
constexpr double kYHi = 1e8;
constexpr int kGridPoints = 4096;

double power_log_eval(double m, double mp, double x) {
  return std::pow(x, m) * std::pow(1.0 + std::log1p(x), mp);
}

}  // namespace

OrliczFunction OrliczFunction::power(double m) {
  if (m < 1.0) throw std::domain_error("OrliczFunction::power: m must be >= 1");
  OrliczFunction f;
  f.family_ = OrliczFamily::Power;
  f.m_ = m;
  f.name_ = "power(" + std::to_string(m) + ")";
  return f;
}

OrliczFunction OrliczFunction::power_log(double m, double m_prime) {
  if (m < 1.0) throw std::domain_error("OrliczFunction::power_log: m must be >= 1");
  if (m_prime < 0.0) throw std::domain_error("OrliczFunction::power_log: m' must be >= 0");
  OrliczFunction f;
  f.family_ = OrliczFamily::PowerLog;
  f.m_ = m;
  f.m_prime_ = m_prime;
  f.name_ = "power_log(" + std::to_string(m) + "," + std::to_string(m_prime) + ")";
  return f;
}

OrliczFunction OrliczFunction::custom(std::string name, std::function<double(double)> evaluator) {
  if (!evaluator) throw std::invalid_argument("OrliczFunction::custom: null evaluator");
  OrliczFunction f;
  f.family_ = OrliczFamily::Custom;
  f.evaluator_ = std::move(evaluator);
  f.name_ = std::move(name);
  return f;
}

double OrliczFunction::operator()(double x) const {
  if (x < 0.0) throw std::domain_error("OrliczFunction: negative argument");
  switch (family_) {
    case OrliczFamily::Power:
      return std::pow(x, m_);
    case OrliczFamily::PowerLog:
      return power_log_eval(m_, m_prime_, x);
    case OrliczFamily::Custom:
      return evaluator_(x);
  }
  return 0.0;
}

double OrliczFunction::inverse(double z) const {
  if (z < 0.0) throw std::domain_error("OrliczFunction::inverse: negative argument");
  if (z == 0.0) return 0.0;
  if (family_ == OrliczFamily::Power) return std::pow(z, 1.0 / m_);
  // Bracket then bisect; Phi is continuous and strictly increasing on (0,inf).
  double hi = 1.0;
  while ((*this)(hi) < z) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("OrliczFunction::inverse: bracket overflow", hi);
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && (hi - lo) > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((*this)(mid) < z ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SubmultiplicativityReport check_submultiplicative(const OrliczFunction& phi,
                                                  std::span<const double> grid) {
  if (grid.empty()) throw std::domain_error("check_submultiplicative: empty grid");
  for (double g : grid) {
    if (!(g > 0.0)) throw std::domain_error("check_submultiplicative: grid entries must be > 0");
  }
  SubmultiplicativityReport report;
  for (double x : grid) {
    for (double y : grid) {
      const double lhs = phi(x * y);
      const double rhs = phi(x) * phi(y);
      if (rhs > 0.0) report.worst_ratio = std::max(report.worst_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12)) {
        report.ok = false;
        report.violations.push_back({x, y, lhs, rhs});
      }
    }
  }
  return report;
}

PhiTildeQuery::PhiTildeQuery(OrliczFunction phi_in, double q_in, double x_in)
    : phi(std::move(phi_in)), q(q_in), x(x_in) {
  if (!(q > 1.0)) throw std::domain_error("PhiTildeQuery: q must be > 1");
  if (x < 0.0) throw std::domain_error("PhiTildeQuery: x must be >= 0");
}

double phi_tilde_q(const PhiTildeQuery& query) {
  if (query.x == 0.0) return 0.0;  // objective <= 0, sup attained as y -> 0
  const double qm1 = query.q - 1.0;
  const auto objective = [&](double y) {
    return std::pow(query.x * y, qm1) - query.phi(y) / y;
  };

  double best = -std::numeric_limits<double>::infinity();
  int best_index = -1;
  const double log_lo = std::log(kYLo);
  const double log_step = (std::log(kYHi) - log_lo) / (kGridPoints - 1);
  for (int i = 0; i < kGridPoints; ++i) {
    const double value = objective(std::exp(log_lo + i * log_step));
    if (value > best) {
      best = value;
      best_index = i;
    }
  }
  if (!(best > 0.0)) return 0.0;
  if (best_index == 0 || best_index == kGridPoints - 1) {
    throw NumericError("phi_tilde_q: supremum not bracketed by the search grid", best);
  }

  // Golden-section refinement of [y_{i-1}, y_{i+1}] in log space.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = log_lo + (best_index - 1) * log_step;
  double b = log_lo + (best_index + 1) * log_step;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(std::exp(c));
  double fd = objective(std::exp(d));
  int iterations = 0;
  while (std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(a))) {
    if (++iterations > 300) {
      throw NumericError("phi_tilde_q: golden-section refinement did not converge",
                         std::max(best, std::max(fc, fd)));
    }
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(std::exp(d));
    }
  }
  return std::max(0.0, std::max(best, std::max(fc, fd)));
}

double phi_tilde_q_bound(const PhiTildeQuery& query) {
  const double q = query.q;
  const double x = query.x;
  const double qm1 = q - 1.0;
  if (x == 0.0) return 0.0;
  switch (query.phi.family()) {
    case OrliczFamily::Power: {
      const double m = query.phi.m();
      if (m <= q) {
        throw std::domain_error("phi_tilde_q_bound: Power family requires m > q");
      }
      // L(y) = y^{m-q}, so L^{-1}(z) = z^{1/(m-q)}.
      const double l_inv = std::pow(std::pow(x, qm1), 1.0 / (m - q));
      return std::pow(x * l_inv, qm1);
    }
    case OrliczFamily::PowerLog: {
      const double m = query.phi.m();
      const double mp = query.phi.m_prime();
      if (std::abs(m - q) > 1e-12) {
        throw std::domain_error("phi_tilde_q_bound: PowerLog family requires m == q");
      }
      const double z = std::pow(x, qm1);
      if (mp == 0.0) {
        // L == 1: the transform is 0 for x <= 1 and unbounded above 1.
        return x <= 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
      }
      // L(y) = (1 + ln(1+y))^{m'}, so L^{-1}(z) = exp(z^{1/m'} - 1) - 1 for z > 1.
      const double l_inv = z <= 1.0 ? 0.0 : std::expm1(std::pow(z, 1.0 / mp) - 1.0);
      return std::pow(x * l_inv, qm1);
    }
    case OrliczFamily::Custom:
      throw std::domain_error("phi_tilde_q_bound: no closed form for custom families");
  }
  return 0.0;
}

double phi_tilde_q_bound_power(double m, double q, double x) {
  if (!(q > 1.0) || m <= q) throw std::domain_error("phi_tilde_q_bound_power: need m > q > 1");
  if (x < 0.0) throw std::domain_error("phi_tilde_q_bound_power: x must be >= 0");
  return std::pow(x, (m - 1.0) * (q - 1.0) / (m - q));
}

double phi_tilde_q_bound_power_log(double b, double q, double x) {
  if (!(q > 1.0) || b < 0.0) throw std::domain_error("phi_tilde_q_bound_power_log: need q > 1, b >= 0");
  if (x < 0.0) throw std::domain_error("phi_tilde_q_bound_power_log: x must be >= 0");
  if (x == 0.0) return 0.0;
  return std::exp((q - 1.0) * std::pow(x, 1.0 / (1.0 + b))) * std::pow(x, q - 1.0);
}

double estimate_orlicz_norm(std::span<const double> samples, const OrliczFunction& phi) {
  if (samples.empty()) throw std::domain_error("estimate_orlicz_norm: empty sample set");
  double max_abs = 0.0;
  for (double s : samples) max_abs = std::max(max_abs, std::abs(s));
  if (max_abs == 0.0) return 0.0;

  const double n = static_cast<double>(samples.size());
  const auto mean_phi = [&](double u) {
    double acc = 0.0;
    for (double s : samples) acc += phi(std::abs(s) / u);
    return acc / n;
  };

  // mean Phi(|x|/u) is decreasing in u; these ends bracket mean = 1.
  double lo = max_abs / phi.inverse(n);
  double hi = max_abs / phi.inverse(1.0 / n);
  if (mean_phi(lo) < 1.0) return lo;
  if (mean_phi(hi) > 1.0) return hi;
  for (int i = 0; i < 200 && (hi - lo) > 1e-12 * hi; ++i) {
    const double mid = std::sqrt(lo * hi);
    (mean_phi(mid) > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace infchain
