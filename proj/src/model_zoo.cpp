#include "infchain/model_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace infchain {

namespace {

constexpr std::size_t kLagTableSize = 16384;

Estimate with_batch_ci(const std::vector<double>& samples, const OrliczFunction& phi) {
  Estimate est;
  est.value = estimate_orlicz_norm(samples, phi);
  est.provenance = Provenance::Empirical;
  constexpr std::size_t kBatches = 10;
  if (samples.size() >= 10 * kBatches) {
    const std::size_t len = samples.size() / kBatches;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t b = 0; b < kBatches; ++b) {
      std::span<const double> batch(samples.data() + b * len, len);
      const double v = estimate_orlicz_norm(batch, phi);
      const double delta = v - mean;
      mean += delta / static_cast<double>(b + 1);
      m2 += delta * (v - mean);
    }
    const double sd = std::sqrt(m2 / (kBatches - 1));
    est.ci_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(kBatches));
  }
  return est;
}

// Materializes c_j once so hot apply loops avoid pow(); exact values are used
// past the table end.
std::vector<double> lag_table(const CoefficientSequence& c) {
  const std::size_t n = c.finite_support() ? c.order() : kLagTableSize;
  std::vector<double> table(n);
  for (std::size_t j = 1; j <= n; ++j) table[j - 1] = c.at(j);
  return table;
}

double lag_coeff(const std::vector<double>& table, const CoefficientSequence& c, std::size_t j) {
  return j <= table.size() ? table[j - 1] : (c.finite_support() ? 0.0 : c.at(j));
}

void require_contraction(double a, const char* who) {
  if (!(a < 1.0)) {
    throw ContractionViolation(std::string(who) + ": summed Lipschitz coefficients " +
                               std::to_string(a) + " must be < 1");
  }
}

}  // namespace

Estimate sampler_orlicz_norm(const Sampler& sampler, const OrliczFunction& phi, std::size_t n,
                             std::uint64_t seed) {
  if (const auto closed = closed_orlicz_norm(sampler, phi)) {
    return {*closed, Provenance::ClosedForm, 0.0};
  }
  Rng rng(seed, {stream_tag::kNormEstimate});
  std::vector<double> samples(n);
  for (double& s : samples) s = std::abs(sampler.draw(rng));
  return with_batch_ci(samples, phi);
}

Estimate mu_phi_report(const ChainModel& model, const OrliczFunction& phi, std::size_t n,
                       std::uint64_t seed) {
  if (const auto closed = model.closed_mu_phi(phi)) {
    return {*closed, Provenance::ClosedForm, 0.0};
  }
  const int d = model.dim();
  std::vector<double> out(static_cast<std::size_t>(d));
  std::vector<double> samples(n);
  const PastView zero_past(nullptr, 0, d);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, {stream_tag::kMoment, i});
    model.apply(zero_past, rng, out);
    samples[i] = state_norm(out);
  }
  return with_batch_ci(samples, phi);
}

ChainModel nonlinear_ar(std::function<double(const PastView&)> map, CoefficientSequence coeffs,
                        Sampler noise) {
  require_contraction(coeffs.sum(), "nonlinear_ar");
  const double at_zero = map(PastView(nullptr, 0, 1));
  auto apply = [map = std::move(map), noise](const PastView& past, Rng& rng,
                                             std::span<double> out) {
    out[0] = map(past) + noise.draw(rng);
  };
  ChainModel model = ChainModel::custom("nonlinear_ar", 1, std::move(apply), std::move(coeffs));
  if (at_zero == 0.0) {
    model.with_closed_mu_phi([noise](const OrliczFunction& phi) {
      return closed_orlicz_norm(noise, phi);
    });
  }
  return model;
}

ChainModel nonlinear_ar_links(std::vector<LagLink> links, Sampler noise) {
  std::vector<double> lips;
  lips.reserve(links.size());
  for (const auto& link : links) {
    if (!link.fn) throw std::invalid_argument("nonlinear_ar_links: null link");
    if (link.lip < 0.0) throw std::domain_error("nonlinear_ar_links: negative Lipschitz constant");
    lips.push_back(link.lip);
  }
  auto map = [links = std::move(links)](const PastView& past) {
    double acc = 0.0;
    for (std::size_t j = 0; j < links.size(); ++j) acc += links[j].fn(past.scalar(j + 1));
    return acc;
  };
  return nonlinear_ar(std::move(map), CoefficientSequence::finite(std::move(lips)), noise);
}

ChainModel linear_ar(std::vector<double> weights, Sampler noise) {
  std::vector<double> lips;
  double weight_sum = 0.0;
  for (double w : weights) {
    lips.push_back(std::abs(w));
    weight_sum += w;
  }
  auto map = [weights = std::move(weights)](const PastView& past) {
    double acc = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * past.scalar(j + 1);
    return acc;
  };
  ChainModel model = nonlinear_ar(std::move(map), CoefficientSequence::finite(std::move(lips)), noise);
  const double noise_var = [&] {
    const auto m2 = noise.abs_moment(2.0);
    return m2 ? *m2 - noise.mean() * noise.mean() : std::numeric_limits<double>::quiet_NaN();
  }();
  model.with_closed_mean(noise.mean() / (1.0 - weight_sum));
  if (std::isfinite(noise_var)) {
    model.with_closed_long_run_variance(noise_var / ((1.0 - weight_sum) * (1.0 - weight_sum)));
  }
  return model;
}

ChainModel sre_random_affine(Sampler a_sampler, Sampler b_sampler, const OrliczFunction& phi,
                             std::uint64_t seed) {
  const Estimate contraction = sampler_orlicz_norm(a_sampler, phi, 100000, seed);
  if (!(contraction.value < 1.0)) {
    throw ContractionViolation("sre_random_affine: ||A||_Phi = " +
                               std::to_string(contraction.value) + " must be < 1");
  }
  auto apply = [a_sampler, b_sampler](const PastView& past, Rng& rng, std::span<double> out) {
    const double a = a_sampler.draw(rng);
    const double b = b_sampler.draw(rng);
    out[0] = a * past.scalar(1) + b;
  };
  ChainModel model = ChainModel::custom("sre_random_affine", 1, std::move(apply),
                                        CoefficientSequence::finite({contraction.value}));
  model.with_coeffs_provenance(contraction.provenance);
  model.with_closed_mu_phi(
      [b_sampler](const OrliczFunction& p) { return closed_orlicz_norm(b_sampler, p); });
  model.with_closed_mean(b_sampler.mean() / (1.0 - a_sampler.mean()));
  return model;
}

ChainModel galton_watson_immigration(Sampler offspring, Sampler immigration, GwVariant variant,
                                     const OrliczFunction& phi, std::uint64_t seed) {
  const Estimate offspring_norm = sampler_orlicz_norm(offspring, phi, 100000, seed);
  if (!(offspring_norm.value < 1.0)) {
    throw ContractionViolation("galton_watson_immigration: ||offspring||_Phi = " +
                               std::to_string(offspring_norm.value) + " must be < 1");
  }
  const bool absorbing = variant == GwVariant::AbsorbingAtZero;
  auto apply = [offspring, immigration, absorbing](const PastView& past, Rng& rng,
                                                   std::span<double> out) {
    const long count = std::lround(past.scalar(1));
    if (absorbing && count <= 0) {
      out[0] = 0.0;
      return;
    }
    double total = immigration.draw(rng);
    for (long i = 0; i < count; ++i) total += offspring.draw(rng);
    out[0] = total;
  };
  ChainModel model = ChainModel::custom("galton_watson_immigration", 1, std::move(apply),
                                        CoefficientSequence::finite({offspring_norm.value}));
  model.with_coeffs_provenance(offspring_norm.provenance);
  if (absorbing) {
    model.with_closed_mu_phi([](const OrliczFunction&) { return std::optional<double>(0.0); });
    model.with_closed_mean(0.0);
  } else {
    model.with_closed_mu_phi(
        [immigration](const OrliczFunction& p) { return closed_orlicz_norm(immigration, p); });
    model.with_closed_mean(immigration.mean() / (1.0 - offspring.mean()));
  }
  const double typical = std::max(1.0, std::abs(model.closed_mean().value_or(1.0)));
  model.with_past_entry([typical](Rng& rng, std::span<double> out) {
    out[0] = static_cast<double>(rng.poisson(typical));
  });
  return model;
}

namespace {

ChainModel arch_core(std::string name, CoefficientSequence a_coeffs, ChainModel::ApplyFn apply,
                     double scale_at_zero, Sampler noise, Provenance coeff_prov) {
  require_contraction(a_coeffs.sum(), name.c_str());
  ChainModel model = ChainModel::custom(std::move(name), 1, std::move(apply), std::move(a_coeffs));
  model.with_coeffs_provenance(coeff_prov);
  model.with_closed_mu_phi([noise, scale_at_zero](const OrliczFunction& p) -> std::optional<double> {
    const auto norm = closed_orlicz_norm(noise, p);
    if (!norm) return std::nullopt;
    return std::abs(scale_at_zero) * *norm;
  });
  if (noise.mean() == 0.0) model.with_closed_mean(0.0);
  return model;
}

}  // namespace

ChainModel nl_arch(double alpha, std::vector<LagLink> links, Sampler noise,
                   const OrliczFunction& phi, std::uint64_t seed) {
  const Estimate noise_norm = sampler_orlicz_norm(noise, phi, 100000, seed);
  std::vector<double> lips;
  double scale_at_zero = alpha;
  for (const auto& link : links) {
    if (!link.fn) throw std::invalid_argument("nl_arch: null link");
    if (link.lip < 0.0) throw std::domain_error("nl_arch: negative Lipschitz constant");
    lips.push_back(noise_norm.value * link.lip);
    scale_at_zero += link.fn(0.0);
  }
  auto apply = [alpha, links = std::move(links), noise](const PastView& past, Rng& rng,
                                                        std::span<double> out) {
    double s = alpha;
    const std::size_t n = std::min<std::size_t>(links.size(), past.lags());
    for (std::size_t j = 0; j < n; ++j) s += links[j].fn(past.scalar(j + 1));
    for (std::size_t j = n; j < links.size(); ++j) s += links[j].fn(0.0);
    out[0] = noise.draw(rng) * s;
  };
  return arch_core("nl_arch", CoefficientSequence::finite(std::move(lips)), std::move(apply),
                   scale_at_zero, noise, noise_norm.provenance);
}

ChainModel larch(double alpha, CoefficientSequence c, Sampler noise, const OrliczFunction& phi,
                 std::uint64_t seed) {
  const Estimate noise_norm = sampler_orlicz_norm(noise, phi, 100000, seed);
  auto table = lag_table(c);
  auto apply = [alpha, table = std::move(table), c, noise](const PastView& past, Rng& rng,
                                                           std::span<double> out) {
    double s = alpha;
    const std::size_t n = past.lags();
    for (std::size_t j = 1; j <= n; ++j) s += lag_coeff(table, c, j) * past.scalar(j);
    out[0] = noise.draw(rng) * s;
  };
  ChainModel model = arch_core("larch", c.scaled(noise_norm.value), std::move(apply), alpha,
                               noise, noise_norm.provenance);
  if (noise.mean() != 0.0) {
    model.with_closed_mean(noise.mean() * alpha / (1.0 - noise.mean() * c.sum()));
  }
  return model;
}

ChainModel linear_input(std::function<double(double, double)> f, double f_lip,
                        CoefficientSequence c, Sampler noise, std::optional<double> known_mean) {
  if (!(f_lip >= 0.0)) throw std::domain_error("linear_input: f_lip must be >= 0");
  CoefficientSequence a_coeffs = c.scaled(f_lip);
  require_contraction(a_coeffs.sum(), "linear_input");
  auto table = lag_table(c);
  auto apply = [f = std::move(f), table = std::move(table), c, noise](
                   const PastView& past, Rng& rng, std::span<double> out) {
    double acc = 0.0;
    const std::size_t n = past.lags();
    for (std::size_t j = 1; j <= n; ++j) acc += lag_coeff(table, c, j) * past.scalar(j);
    out[0] = f(acc, noise.draw(rng));
  };
  ChainModel model = ChainModel::custom("linear_input", 1, std::move(apply), std::move(a_coeffs));
  if (known_mean) model.with_closed_mean(*known_mean);
  return model;
}

ChainModel linear_input_link(std::function<double(double)> link, double link_lip,
                             CoefficientSequence c, Sampler noise) {
  if (link(0.0) != 0.0) throw std::domain_error("linear_input_link: link(0) must be 0");
  std::optional<double> known_mean;
  if (noise.symmetric_about_zero()) known_mean = 0.0;  // odd-symmetric dynamics
  auto f = [link = std::move(link)](double t, double s) { return link(t) + s; };
  ChainModel model = linear_input(std::move(f), link_lip, std::move(c), noise, known_mean);
  model.with_closed_mu_phi(
      [noise](const OrliczFunction& p) { return closed_orlicz_norm(noise, p); });
  return model;
}

PastMap past_map_zero() {
  return {[](const PastView&) { return 0.0; }, {}};
}

PastMap past_map_const(double value) {
  return {[value](const PastView&) { return value; }, {}};
}

PastMap past_map_linear(std::vector<double> weights) {
  std::vector<double> lip;
  lip.reserve(weights.size());
  for (double w : weights) lip.push_back(std::abs(w));
  auto fn = [weights = std::move(weights)](const PastView& past) {
    double acc = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * past.scalar(j + 1);
    return acc;
  };
  return {std::move(fn), std::move(lip)};
}

PastMap past_map_arch(double omega, double alpha) {
  if (!(omega > 0.0) || alpha < 0.0) {
    throw std::domain_error("past_map_arch: need omega > 0 and alpha >= 0");
  }
  auto fn = [omega, alpha](const PastView& past) {
    const double x = past.scalar(1);
    return std::sqrt(omega + alpha * x * x);
  };
  return {std::move(fn), {std::sqrt(alpha)}};
}

ChainModel affine_model(PastMap m_map, PastMap f_map, Sampler noise, const OrliczFunction& phi,
                        std::optional<double> det_lower_bound, std::uint64_t seed,
                        std::optional<double> known_mean) {
  if (!m_map.fn || !f_map.fn) throw std::invalid_argument("affine_model: null map");
  const Estimate noise_norm = sampler_orlicz_norm(noise, phi, 100000, seed);
  const std::size_t order = std::max(m_map.lip.size(), f_map.lip.size());
  std::vector<double> lips(order, 0.0);
  for (std::size_t j = 0; j < order; ++j) {
    const double lm = j < m_map.lip.size() ? m_map.lip[j] : 0.0;
    const double lf = j < f_map.lip.size() ? f_map.lip[j] : 0.0;
    lips[j] = noise_norm.value * lm + lf;
  }
  CoefficientSequence a_coeffs = CoefficientSequence::finite(std::move(lips));
  require_contraction(a_coeffs.sum(), "affine_model");
  if (det_lower_bound && !(*det_lower_bound > 0.0)) {
    throw std::domain_error("affine_model: det_lower_bound must be > 0 when supplied");
  }

  const PastView zero_past(nullptr, 0, 1);
  const double m_at_zero = m_map.fn(zero_past);
  const double f_at_zero = f_map.fn(zero_past);

  auto apply = [m = std::move(m_map.fn), f = std::move(f_map.fn), noise](
                   const PastView& past, Rng& rng, std::span<double> out) {
    out[0] = m(past) * noise.draw(rng) + f(past);
  };
  ChainModel model = ChainModel::custom("affine_model", 1, std::move(apply), std::move(a_coeffs));
  model.with_coeffs_provenance(noise_norm.provenance);
  if (f_at_zero == 0.0) {
    model.with_closed_mu_phi(
        [noise, m_at_zero](const OrliczFunction& p) -> std::optional<double> {
          const auto norm = closed_orlicz_norm(noise, p);
          if (!norm) return std::nullopt;
          return std::abs(m_at_zero) * *norm;
        });
  }
  if (known_mean) model.with_closed_mean(*known_mean);
  if (det_lower_bound) model.with_density_data(*det_lower_bound, noise.density_sup());
  return model;
}

ContractionReport validate_contraction(const ChainModel& model, const OrliczFunction& phi,
                                       std::size_t mc_samples, std::uint64_t seed) {
  ContractionReport report;
  report.a = {model.coeffs().sum(), model.coeffs_provenance(), 0.0};
  report.mu_1 = mu_phi_report(model, OrliczFunction::power(1.0), mc_samples, seed);
  report.mu_phi = mu_phi_report(model, phi, mc_samples, seed);
  report.sum_ok = report.a.value < 1.0;
  report.moment_ok = std::isfinite(report.mu_phi.value);
  return report;
}

LipschitzCheckReport empirical_lipschitz_check(const ChainModel& model, const OrliczFunction& phi,
                                               std::size_t n_pairs, std::size_t past_len,
                                               std::uint64_t seed,
                                               std::size_t innovations_per_pair,
                                               double tolerance) {
  if (n_pairs < 100) throw std::domain_error("empirical_lipschitz_check: need n_pairs >= 100");
  if (past_len == 0) throw std::domain_error("empirical_lipschitz_check: need past_len >= 1");
  const int d = model.dim();
  const std::size_t block = static_cast<std::size_t>(d);

  LipschitzCheckReport report;
  report.n_pairs = n_pairs;
  report.tolerance = tolerance;

  std::vector<double> x(past_len * block), y(past_len * block);
  std::vector<double> fx(block), fy(block), gaps(innovations_per_pair);
  for (std::size_t pair = 0; pair < n_pairs; ++pair) {
    Rng pair_rng(seed, {stream_tag::kLipschitzPast, pair});
    // blocks are stored in time order; lag j lives at block (past_len - j)
    for (std::size_t lag = 1; lag <= past_len; ++lag) {
      std::span<double> slot(x.data() + (past_len - lag) * block, block);
      model.draw_past_entry(pair_rng, slot);
    }
    y = x;
    bool flipped_any = false;
    for (std::size_t lag = 1; lag <= past_len; ++lag) {
      if (pair_rng.bernoulli(0.5)) {
        std::span<double> slot(y.data() + (past_len - lag) * block, block);
        model.draw_past_entry(pair_rng, slot);
        flipped_any = true;
      }
    }
    if (!flipped_any) {
      std::span<double> slot(y.data() + (past_len - 1) * block, block);
      model.draw_past_entry(pair_rng, slot);
    }

    const PastView past_x(x.data() + x.size(), past_len, d);
    const PastView past_y(y.data() + y.size(), past_len, d);
    double rhs = 0.0;
    for (std::size_t lag = 1; lag <= past_len; ++lag) {
      std::span<const double> bx(x.data() + (past_len - lag) * block, block);
      std::span<const double> by(y.data() + (past_len - lag) * block, block);
      rhs += model.coeffs().at(lag) * state_gap(bx, by);
    }

    for (std::size_t k = 0; k < innovations_per_pair; ++k) {
      Rng innov_x(seed, {stream_tag::kLipschitzInnov, pair, k});
      Rng innov_y(seed, {stream_tag::kLipschitzInnov, pair, k});
      model.apply(past_x, innov_x, fx);
      model.apply(past_y, innov_y, fy);
      gaps[k] = state_gap(fx, fy);
    }
    const double lhs = estimate_orlicz_norm(gaps, phi);

    double ratio;
    if (rhs > 1e-300) {
      ratio = lhs / rhs;
    } else {
      ratio = lhs < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_lhs = lhs;
      report.worst_rhs = rhs;
    }
  }
  report.pass = report.worst_ratio <= 1.0 + tolerance;
  return report;
}

}  // namespace infchain
