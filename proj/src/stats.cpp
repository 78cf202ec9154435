#include "infchain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "infchain/parallel.hpp"

namespace infchain {

namespace {

constexpr std::uint64_t kMeanRun = 101;
constexpr std::uint64_t kSllnRun = 102;
constexpr std::uint64_t kDensityRun = 103;
constexpr std::uint64_t kLrvRun = 104;
constexpr std::uint64_t kCltRun = 105;
constexpr std::uint64_t kSipRun = 106;

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.begin() + n / 2);
  return 0.5 * (v[n / 2 - 1] + hi);
}

double quantile_of(std::vector<double> v, double prob) {
  const std::size_t n = v.size();
  std::size_t idx = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n)));
  idx = std::min(std::max<std::size_t>(idx, 1), n) - 1;
  std::nth_element(v.begin(), v.begin() + idx, v.end());
  return v[idx];
}

SimulationPlan stationary_plan(const ChainModel& model, std::size_t horizon, std::uint64_t seed) {
  const TruncationChoice choice =
      choose_truncation(model, OrliczFunction::power(1.0), 1e-6, seed);
  SimulationPlan plan;
  plan.p = choice.p;
  plan.burn_in = choice.burn_in;
  plan.horizon = horizon;
  plan.seed = seed;
  return plan;
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

KsResult ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::domain_error("ks_statistic: empty sample set");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double distance = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    distance = std::max(distance, f - static_cast<double>(i) / n);
    distance = std::max(distance, static_cast<double>(i + 1) / n - f);
  }
  const double lambda = std::sqrt(n) * distance;
  KsResult result{distance, 1.0};
  if (lambda > 0.04) {
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      sum += sign * std::exp(-2.0 * k * k * lambda * lambda);
    }
    result.p_value = std::clamp(2.0 * sum, 0.0, 1.0);
  }
  return result;
}

LrvEstimate estimate_long_run_variance(std::span<const double> path, LrvMethod method,
                                       const LrvOptions& options) {
  const std::size_t n = path.size();
  if (n < 16) throw std::domain_error("estimate_long_run_variance: path too short");
  double mean = 0.0;
  for (double x : path) mean += x;
  mean /= static_cast<double>(n);

  LrvEstimate est;
  est.method = method;
  if (method == LrvMethod::TruncatedAutocovariance) {
    const std::size_t lag_cap =
        options.lag_cap > 0 ? options.lag_cap
                            : static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
    if (lag_cap >= n) throw std::domain_error("estimate_long_run_variance: lag cap >= n");
    est.window = lag_cap;
    double value = 0.0;
    for (std::size_t lag = 0; lag <= lag_cap; ++lag) {
      double acc = 0.0;
      for (std::size_t t = 0; t + lag < n; ++t) acc += (path[t] - mean) * (path[t + lag] - mean);
      const double gamma = acc / static_cast<double>(n);
      if (lag == 0) {
        value += gamma;
      } else {
        const double taper = 1.0 - static_cast<double>(lag) / static_cast<double>(lag_cap + 1);
        value += 2.0 * taper * gamma;
      }
    }
    est.value = value;
  } else {
    const std::size_t batch_len =
        options.batch_len > 0 ? options.batch_len
                              : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const std::size_t n_batches = n / batch_len;
    if (n_batches < 2) throw std::domain_error("estimate_long_run_variance: too few batches");
    est.window = batch_len;
    double bmean = 0.0, m2 = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      double acc = 0.0;
      for (std::size_t t = 0; t < batch_len; ++t) acc += path[b * batch_len + t];
      const double avg = acc / static_cast<double>(batch_len);
      const double delta = avg - bmean;
      bmean += delta / static_cast<double>(b + 1);
      m2 += delta * (avg - bmean);
    }
    est.value = static_cast<double>(batch_len) * m2 / static_cast<double>(n_batches - 1);
  }
  // a non-positive estimate is reported, not clamped
  est.nonpositive_warning = !(est.value > 0.0);
  return est;
}

LrvEstimate estimate_long_run_variance(const ChainModel& model, LrvMethod method, std::size_t n,
                                       std::uint64_t seed, const LrvOptions& options) {
  SimulationPlan plan = stationary_plan(model, n, seed);
  const SamplePath path = simulate_truncated(model, plan, kLrvRun);
  if (model.dim() != 1) {
    throw std::domain_error("estimate_long_run_variance: scalar chains only");
  }
  return estimate_long_run_variance(path.values, method, options);
}

Estimate stationary_mean(const ChainModel& model, std::uint64_t seed, std::size_t n) {
  if (const auto closed = model.closed_mean()) return {*closed, Provenance::ClosedForm, 0.0};
  SimulationPlan plan = stationary_plan(model, n, seed ^ 0x3EA40F72ULL);
  const SamplePath path = simulate_truncated(model, plan, kMeanRun);
  double mean = 0.0;
  for (std::size_t t = 0; t < path.horizon(); ++t) mean += path.scalar(t);
  mean /= static_cast<double>(path.horizon());
  // CI from the batch-means long-run variance of the same run
  const LrvEstimate lrv = estimate_long_run_variance(path.values, LrvMethod::BatchMeans);
  const double se = std::sqrt(std::max(lrv.value, 0.0) / static_cast<double>(path.horizon()));
  return {mean, Provenance::Empirical, 1.96 * se};
}

SllnReport slln_diagnostic(const ChainModel& model, double q,
                           std::span<const std::size_t> n_grid, std::size_t reps,
                           std::uint64_t seed, std::optional<double> mean0, int threads) {
  if (!(q > 1.0 && q < 2.0)) throw std::domain_error("slln_diagnostic: q must be in (1,2)");
  if (n_grid.empty()) throw std::domain_error("slln_diagnostic: empty n grid");
  if (reps == 0) throw std::domain_error("slln_diagnostic: need reps >= 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw std::domain_error("slln_diagnostic: n grid must be strictly increasing");
    }
  }
  if (model.dim() != 1) throw std::domain_error("slln_diagnostic: scalar chains only");

  SllnReport report;
  report.q = q;
  report.n_grid.assign(n_grid.begin(), n_grid.end());
  report.mean0 = mean0 ? Estimate{*mean0, Provenance::ClosedForm, 0.0}
                       : stationary_mean(model, seed);
  const double center = report.mean0.value;
  const std::size_t n_max = n_grid.back();
  const SimulationPlan base = stationary_plan(model, n_max, seed);

  std::vector<double> stats(reps * n_grid.size());
  parallel_for(reps, threads, [&](std::size_t rep) {
    double partial = 0.0;
    std::size_t next = 0;
    run_truncated_chain(
        model, base.p, base.burn_in, n_max,
        [&](std::size_t s) { return Rng(seed, {stream_tag::kStats, kSllnRun, rep, s}); },
        [&](std::size_t t, std::span<const double> state) {
          partial += state[0] - center;
          if (next < n_grid.size() && t == n_grid[next]) {
            stats[rep * n_grid.size() + next] =
                std::abs(partial) * std::pow(static_cast<double>(t), -1.0 / q);
            ++next;
          }
        });
  });

  report.medians.resize(n_grid.size());
  std::vector<double> column(reps);
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    for (std::size_t rep = 0; rep < reps; ++rep) column[rep] = stats[rep * n_grid.size() + i];
    report.medians[i] = median_of(column);
  }
  report.ratios.resize(n_grid.size(), 0.0);
  report.pass = true;
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    report.ratios[i] = report.medians[i] / report.medians[i - 1];
    if (!(report.medians[i] < report.medians[i - 1])) report.pass = false;
  }
  return report;
}

CltReport clt_test(const ChainModel& model, std::size_t n, std::size_t reps,
                   std::optional<double> sigma2, std::span<const double> t_grid,
                   std::uint64_t seed, std::optional<double> mean0, double p_threshold,
                   int threads) {
  if (reps < 500) throw std::domain_error("clt_test: need reps >= 500");
  if (t_grid.empty()) throw std::domain_error("clt_test: empty t grid");
  if (model.dim() != 1) throw std::domain_error("clt_test: scalar chains only");

  CltReport report;
  report.p_threshold = p_threshold;
  report.t_grid.assign(t_grid.begin(), t_grid.end());
  report.cuts.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("clt_test: t values must lie in (0,1]");
    const auto cut = static_cast<std::size_t>(static_cast<double>(n) * t);
    if (cut < 1) throw std::domain_error("clt_test: [n t] must be >= 1");
    report.cuts.push_back(cut);
  }

  if (sigma2) {
    report.sigma2 = {*sigma2, Provenance::ClosedForm, 0.0};
  } else if (const auto closed = model.closed_long_run_variance()) {
    report.sigma2 = {*closed, Provenance::ClosedForm, 0.0};
  } else {
    const LrvEstimate est = estimate_long_run_variance(
        model, LrvMethod::TruncatedAutocovariance, std::max<std::size_t>(100000, n), seed);
    report.sigma2 = {est.value, Provenance::Empirical, 0.0};
  }
  if (!(report.sigma2.value > 0.0)) {
    throw std::domain_error("clt_test: long-run variance must be > 0");
  }

  const double center =
      mean0 ? *mean0 : stationary_mean(model, seed).value;
  const SimulationPlan base = stationary_plan(model, n, seed);
  const std::size_t n_t = t_grid.size();
  std::vector<double> stats(reps * n_t);
  parallel_for(reps, threads, [&](std::size_t rep) {
    double partial = 0.0;
    std::size_t next = 0;
    run_truncated_chain(
        model, base.p, base.burn_in, n,
        [&](std::size_t s) { return Rng(seed, {stream_tag::kStats, kCltRun, rep, s}); },
        [&](std::size_t t, std::span<const double> state) {
          partial += state[0] - center;
          while (next < n_t && t == report.cuts[next]) {
            stats[rep * n_t + next] = partial / std::sqrt(static_cast<double>(n));
            ++next;
          }
        });
  });

  report.pass = true;
  std::vector<double> column(reps);
  for (std::size_t i = 0; i < n_t; ++i) {
    const double scale = std::sqrt(report.sigma2.value * report.t_grid[i]);
    for (std::size_t rep = 0; rep < reps; ++rep) column[rep] = stats[rep * n_t + i] / scale;
    const KsResult ks = ks_statistic(column, standard_normal_cdf);
    report.ks.push_back(ks);
    if (!(ks.p_value > p_threshold)) report.pass = false;
  }
  return report;
}

SipReport sip_lil_diagnostic(const ChainModel& model, double sigma2, std::size_t n,
                             std::size_t reps, std::uint64_t seed, std::optional<double> mean0,
                             double band_lo, double band_hi, int threads) {
  if (!(sigma2 > 0.0)) throw std::domain_error("sip_lil_diagnostic: sigma2 must be > 0");
  if (n < 1000) throw std::domain_error("sip_lil_diagnostic: need n >= 1000");
  if (reps == 0) throw std::domain_error("sip_lil_diagnostic: need reps >= 1");
  if (model.dim() != 1) throw std::domain_error("sip_lil_diagnostic: scalar chains only");

  // dyadic checkpoints 16, 32, ..., plus n itself (ln ln k > 0 from k = 16)
  std::vector<std::size_t> checkpoints;
  for (std::size_t k = 16; k < n; k *= 2) checkpoints.push_back(k);
  checkpoints.push_back(n);

  const double center = mean0 ? *mean0 : stationary_mean(model, seed).value;
  const SimulationPlan base = stationary_plan(model, n, seed);
  std::vector<double> r_values(reps);
  parallel_for(reps, threads, [&](std::size_t rep) {
    double partial = 0.0;
    std::size_t next = 0;
    double worst = 0.0;
    run_truncated_chain(
        model, base.p, base.burn_in, n,
        [&](std::size_t s) { return Rng(seed, {stream_tag::kStats, kSipRun, rep, s}); },
        [&](std::size_t t, std::span<const double> state) {
          partial += state[0] - center;
          if (next < checkpoints.size() && t == checkpoints[next]) {
            const double kk = static_cast<double>(t);
            const double denom = std::sqrt(2.0 * sigma2 * kk * std::log(std::log(kk)));
            worst = std::max(worst, std::abs(partial) / denom);
            ++next;
          }
        });
    r_values[rep] = worst;
  });

  SipReport report;
  report.band_lo = band_lo;
  report.band_hi = band_hi;
  report.reps = reps;
  report.n = n;
  report.p10 = quantile_of(r_values, 0.10);
  report.p50 = quantile_of(r_values, 0.50);
  report.p90 = quantile_of(r_values, 0.90);
  report.pass = report.p90 >= band_lo && report.p90 <= band_hi;
  return report;
}

namespace {

double silverman_bandwidth(std::span<const double> xs, double exponent) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted[static_cast<std::size_t>(0.25 * (n - 1))];
  const double q3 = sorted[static_cast<std::size_t>(0.75 * (n - 1))];
  const double spread = std::min(std::sqrt(var), (q3 - q1) / 1.34);
  if (!(spread > 0.0)) throw std::domain_error("density_bound_check: degenerate sample spread");
  return 0.9 * spread * std::pow(n, exponent);
}

}  // namespace

DensityReport density_bound_check(const ChainModel& model, int n_joint, std::size_t n_samples,
                                  std::uint64_t seed, double slack, std::size_t grid_points) {
  if (n_joint != 1 && n_joint != 2) {
    throw std::domain_error("density_bound_check: n_joint must be 1 or 2");
  }
  if (n_samples < 1000) throw std::domain_error("density_bound_check: need n_samples >= 1000");
  if (model.dim() != 1) throw std::domain_error("density_bound_check: scalar chains only");
  const auto det_lb = model.det_lower_bound();
  const auto f_sup = model.innovation_density_sup();
  if (!det_lb || !(*det_lb > 0.0)) {
    throw std::domain_error("density_bound_check: model must declare det_lower_bound > 0");
  }
  if (!f_sup) {
    throw std::domain_error("density_bound_check: model must declare an innovation density sup");
  }

  SimulationPlan plan = stationary_plan(model, n_samples, seed);
  const SamplePath path = simulate_truncated(model, plan, kDensityRun);
  std::span<const double> xs(path.values);

  DensityReport report;
  report.n_joint = n_joint;
  report.slack = slack;
  report.samples = n_samples;
  report.bound = std::pow(*f_sup / *det_lb, static_cast<double>(n_joint));

  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  if (n_joint == 1) {
    const std::size_t m = grid_points > 0 ? grid_points : 512;
    const double h = silverman_bandwidth(xs, -0.2);
    report.bandwidth = h;
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it, hi = *hi_it;
    report.grid.resize(m);
    report.values.resize(m);
    report.grid_cols = 1;
    const double inv_nh = 1.0 / (static_cast<double>(xs.size()) * h);
    for (std::size_t g = 0; g < m; ++g) {
      const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(m - 1);
      double acc = 0.0;
      for (double s : xs) {
        const double z = (x - s) / h;
        acc += std::exp(-0.5 * z * z);
      }
      report.grid[g] = x;
      report.values[g] = acc * inv_nh * kInvSqrt2Pi;
      report.kde_sup = std::max(report.kde_sup, report.values[g]);
    }
  } else {
    const std::size_t m = grid_points > 0 ? grid_points : 64;
    const std::size_t pairs = xs.size() - 1;
    const double h = silverman_bandwidth(xs, -1.0 / 6.0);
    report.bandwidth = h;
    report.bandwidth2 = h;
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it, hi = *hi_it;
    report.grid.resize(2 * m * m);
    report.values.resize(m * m);
    report.grid_cols = 2;
    const double norm = 1.0 / (static_cast<double>(pairs) * h * h * 2.0 * std::numbers::pi);
    for (std::size_t gx = 0; gx < m; ++gx) {
      const double x = lo + (hi - lo) * static_cast<double>(gx) / static_cast<double>(m - 1);
      for (std::size_t gy = 0; gy < m; ++gy) {
        const double y = lo + (hi - lo) * static_cast<double>(gy) / static_cast<double>(m - 1);
        double acc = 0.0;
        for (std::size_t t = 0; t < pairs; ++t) {
          const double zx = (x - xs[t]) / h;
          const double zy = (y - xs[t + 1]) / h;
          const double r2 = zx * zx + zy * zy;
          if (r2 < 40.0) acc += std::exp(-0.5 * r2);
        }
        const std::size_t idx = gx * m + gy;
        report.grid[2 * idx] = x;
        report.grid[2 * idx + 1] = y;
        report.values[idx] = acc * norm;
        report.kde_sup = std::max(report.kde_sup, report.values[idx]);
      }
    }
  }
  report.pass = report.kde_sup <= report.bound * (1.0 + slack);
  return report;
}

}  // namespace infchain
