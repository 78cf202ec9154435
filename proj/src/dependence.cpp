#include "infchain/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infchain/model_zoo.hpp"
#include "infchain/parallel.hpp"

namespace infchain {

TauEstimateRun estimate_tau(const ChainModel& model, std::span<const std::size_t> r_list,
                            const SimulationPlan& plan, int threads, const Limits& limits) {
  if (r_list.empty()) throw std::domain_error("estimate_tau: empty r grid");
  for (std::size_t r : r_list) {
    if (r == 0) throw std::domain_error("estimate_tau: lags start at 1");
  }
  const std::size_t r_max = *std::max_element(r_list.begin(), r_list.end());

  TauEstimateRun run;
  run.mu_1 = mu_phi_report(model, OrliczFunction::power(1.0));
  SimulationPlan resolved = plan;
  resolved.horizon = std::max(plan.horizon, r_max);
  if (resolved.p == 0) {
    // truncate so the scheme's own error is far below what we measure
    const double target = tau_bound(model.coeffs(), run.mu_1.value, r_max).value / 100.0;
    const TruncationChoice choice = choose_truncation(
        model, OrliczFunction::power(1.0), std::max(target, 1e-12), plan.seed, limits);
    resolved.p = choice.p;
    resolved.burn_in = std::max(resolved.burn_in, choice.burn_in);
  }
  resolved.validate(limits);
  run.resolved_plan = resolved;

  const std::size_t reps = resolved.replications;
  const std::size_t n_r = r_list.size();
  std::vector<double> gaps(reps * n_r);
  parallel_for(reps, threads, [&](std::size_t rep) {
    const auto [a, b] = simulate_coupled_pair(model, resolved.p, resolved.burn_in,
                                              resolved.horizon, resolved.seed, rep, limits);
    for (std::size_t i = 0; i < n_r; ++i) {
      const std::size_t r = r_list[i];
      gaps[rep * n_r + i] = state_gap(a.state(r - 1), b.state(r - 1));
    }
  });

  run.estimates.resize(n_r);
  for (std::size_t i = 0; i < n_r; ++i) {
    double mean = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) mean += gaps[rep * n_r + i];
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const double d = gaps[rep * n_r + i] - mean;
      var += d * d;
    }
    var = reps > 1 ? var / static_cast<double>(reps - 1) : 0.0;
    run.estimates[i] = {r_list[i], mean, 1.96 * std::sqrt(var / static_cast<double>(reps)), reps};
  }
  return run;
}

std::vector<TauComparison> compare_to_bound(std::span<const TauEstimate> estimates,
                                            const CoefficientSequence& coeffs, double mu_1) {
  std::vector<TauComparison> out;
  out.reserve(estimates.size());
  for (const TauEstimate& est : estimates) {
    const TauBound bound = tau_bound(coeffs, mu_1, est.r);
    TauComparison cmp;
    cmp.estimate = est;
    cmp.bound = bound.value;
    cmp.argmin_p = bound.argmin_p;
    cmp.ratio = bound.value > 0.0 ? est.mean_abs_gap / bound.value
                                  : (est.mean_abs_gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    cmp.pass = est.mean_abs_gap - est.ci_halfwidth <= bound.value;
    out.push_back(cmp);
  }
  return out;
}

std::vector<TauComparison> compare_to_bound(std::span<const TauEstimate> estimates,
                                            std::span<const TauBound> bounds) {
  if (estimates.size() != bounds.size()) {
    throw std::domain_error("compare_to_bound: estimate and bound grids differ in length");
  }
  std::vector<TauComparison> out;
  out.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].r != bounds[i].r) {
      throw std::domain_error("compare_to_bound: estimate and bound grids differ at index " +
                              std::to_string(i));
    }
    TauComparison cmp;
    cmp.estimate = estimates[i];
    cmp.bound = bounds[i].value;
    cmp.argmin_p = bounds[i].argmin_p;
    cmp.ratio = cmp.bound > 0.0 ? estimates[i].mean_abs_gap / cmp.bound
                                : (estimates[i].mean_abs_gap == 0.0
                                       ? 0.0
                                       : std::numeric_limits<double>::infinity());
    cmp.pass = estimates[i].mean_abs_gap - estimates[i].ci_halfwidth <= cmp.bound;
    out.push_back(cmp);
  }
  return out;
}

}  // namespace infchain
