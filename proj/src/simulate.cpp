#include "infchain/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infchain/bounds.hpp"
#include "infchain/model_zoo.hpp"
#include "infchain/parallel.hpp"

namespace infchain {

std::vector<std::string> SimulationPlan::validate(const Limits& limits) const {
  if (p == 0) throw std::domain_error("SimulationPlan: p must be >= 1");
  if (horizon == 0) throw std::domain_error("SimulationPlan: horizon must be >= 1");
  if (replications == 0) throw std::domain_error("SimulationPlan: replications must be >= 1");
  if (p > limits.max_truncation) throw CapacityError("SimulationPlan: p exceeds max_truncation");
  if (burn_in > limits.max_burn_in) throw CapacityError("SimulationPlan: burn_in exceeds max_burn_in");
  if (horizon > limits.max_state_values / replications) {
    throw CapacityError("SimulationPlan: horizon x replications exceeds max_state_values");
  }
  std::vector<std::string> warnings;
  if (p > burn_in) {
    warnings.push_back("truncation order p exceeds burn_in; early records keep start-up bias");
  }
  return warnings;
}

ChainStepper::ChainStepper(const ChainModel& model, std::size_t window)
    : model_(&model),
      window_(std::max<std::size_t>(window, 1)),
      block_(static_cast<std::size_t>(model.dim())),
      scratch_(static_cast<std::size_t>(model.dim())) {
  capacity_ = std::max<std::size_t>(2 * window_, 64);
  buf_.assign(capacity_ * block_, 0.0);
  reset();
}

void ChainStepper::reset() {
  std::fill(buf_.begin(), buf_.end(), 0.0);
  pos_ = window_;  // a full window of zero states precedes the first write
  steps_ = 0;
}

std::span<const double> ChainStepper::step(Rng& innovation) {
  if (pos_ == capacity_) {
    std::memmove(buf_.data(), buf_.data() + (pos_ - window_) * block_,
                 window_ * block_ * sizeof(double));
    pos_ = window_;
  }
  const PastView past(buf_.data() + pos_ * block_, window_, model_->dim());
  model_->apply(past, innovation, scratch_);
  ++steps_;
  for (double v : scratch_) {
    if (!std::isfinite(v)) {
      throw NumericError("simulation produced a non-finite value at step " +
                         std::to_string(steps_));
    }
  }
  double* slot = buf_.data() + pos_ * block_;
  std::copy(scratch_.begin(), scratch_.end(), slot);
  ++pos_;
  return {slot, block_};
}

SamplePath simulate_truncated(const ChainModel& model, const SimulationPlan& plan,
                              std::uint64_t replication, const Limits& limits) {
  plan.validate(limits);
  SamplePath path;
  path.dim = model.dim();
  path.plan = plan;
  path.model_id = model.name();
  path.values.reserve(plan.horizon * static_cast<std::size_t>(model.dim()));
  run_truncated_chain(
      model, plan.p, plan.burn_in, plan.horizon,
      [&](std::size_t s) { return Rng(plan.seed, {stream_tag::kSimulate, replication, s}); },
      [&](std::size_t, std::span<const double> state) {
        path.values.insert(path.values.end(), state.begin(), state.end());
      });
  return path;
}

std::pair<SamplePath, SamplePath> simulate_coupled_pair(const ChainModel& model, std::size_t p,
                                                        std::size_t burn_in, std::size_t horizon,
                                                        std::uint64_t seed,
                                                        std::uint64_t replication,
                                                        const Limits& limits) {
  SimulationPlan plan{p, burn_in, horizon, 1, seed};
  plan.validate(limits);
  SamplePath a, b;
  a.dim = b.dim = model.dim();
  a.plan = b.plan = plan;
  a.model_id = b.model_id = model.name();
  a.values.reserve(horizon * static_cast<std::size_t>(model.dim()));
  b.values.reserve(horizon * static_cast<std::size_t>(model.dim()));

  const auto shared = [&](std::size_t s) {
    return Rng(seed, {stream_tag::kCoupledShared, replication, s});
  };
  run_truncated_chain(model, p, burn_in, horizon, shared,
                      [&](std::size_t, std::span<const double> state) {
                        a.values.insert(a.values.end(), state.begin(), state.end());
                      });
  run_truncated_chain(
      model, p, burn_in, horizon,
      [&](std::size_t s) {
        // independent innovations up to time zero, the shared stream after
        if (s <= burn_in) return Rng(seed, {stream_tag::kCoupledBurnIn, replication, s});
        return shared(s);
      },
      [&](std::size_t, std::span<const double> state) {
        b.values.insert(b.values.end(), state.begin(), state.end());
      });
  return {std::move(a), std::move(b)};
}

namespace {

// Padding long enough that the ignored coefficient tail is machine-negligible.
std::size_t padding_length(const CoefficientSequence& coeffs, double tail_constant,
                           const Limits& limits) {
  if (tail_constant == 0.0) return 0;
  if (coeffs.finite_support()) return coeffs.order();
  const double target = 1e-15 * std::max(1.0, std::abs(tail_constant));
  std::size_t n = 1;
  while (coeffs.tail(n) * std::abs(tail_constant) > target) {
    ++n;
    if (n > limits.max_truncation) {
      throw CapacityError("recursive_approximation: tail padding exceeds max_truncation");
    }
  }
  return n;
}

}  // namespace

SamplePath recursive_approximation(const ChainModel& model, double tail_constant, std::size_t n,
                                   std::uint64_t seed, std::uint64_t replication,
                                   const Limits& limits) {
  if (n == 0) throw std::domain_error("recursive_approximation: n must be >= 1");
  if (n > limits.max_state_values) {
    throw CapacityError("recursive_approximation: n exceeds max_state_values");
  }
  const int d = model.dim();
  const auto block = static_cast<std::size_t>(d);
  const std::size_t pad = padding_length(model.coeffs(), tail_constant, limits);

  // history buffer in time order: pad blocks of the tail constant, then the
  // generated values; the view end slides with each step.
  std::vector<double> history((pad + n) * block, tail_constant);
  std::vector<double> out(block);
  SamplePath path;
  path.dim = d;
  path.model_id = model.name();
  path.plan = SimulationPlan{1, 0, n, 1, seed};
  path.values.reserve(n * block);
  for (std::size_t k = 1; k <= n; ++k) {
    Rng innovation(seed, {stream_tag::kRecursive, replication, k});
    const PastView past(history.data() + (pad + k - 1) * block, pad + k - 1, d);
    model.apply(past, innovation, out);
    for (double v : out) {
      if (!std::isfinite(v)) {
        throw NumericError("recursive_approximation produced a non-finite value at step " +
                           std::to_string(k));
      }
    }
    std::copy(out.begin(), out.end(), history.begin() + (pad + k - 1) * block);
    path.values.insert(path.values.end(), out.begin(), out.end());
  }
  return path;
}

TruncationChoice choose_truncation(const ChainModel& model, const OrliczFunction& phi, double eps,
                                   std::uint64_t seed, const Limits& limits) {
  if (!(eps > 0.0)) throw std::domain_error("choose_truncation: eps must be > 0");
  TruncationChoice choice;
  if (std::isinf(eps)) return choice;  // no accuracy requested

  const CoefficientSequence& coeffs = model.coeffs();
  const double a = coeffs.sum();
  if (!(a < 1.0)) throw std::domain_error("choose_truncation: model violates the contraction condition");
  choice.mu_phi = mu_phi_report(model, phi, 100000, seed);
  const double mu = choice.mu_phi.value;
  const double half = 0.5 * eps;
  const double denom = (1.0 - a) * (1.0 - a);

  if (coeffs.finite_support()) {
    choice.p = std::max<std::size_t>(coeffs.order(), 1);
    choice.tail_bound = 0.0;
  } else {
    std::size_t p = 1;
    while (mu * coeffs.tail(p) / denom > half) {
      ++p;
      if (p > limits.max_truncation) {
        throw CapacityError("choose_truncation: requested eps needs p beyond max_truncation");
      }
    }
    choice.p = p;
    choice.tail_bound = mu * coeffs.tail(p) / denom;
  }

  if (mu <= half) {
    choice.burn_in = 0;
    choice.burn_in_bound = mu;
  } else if (a == 0.0) {
    choice.burn_in = 1;
    choice.burn_in_bound = 0.0;
  } else {
    const double q = std::ceil(static_cast<double>(choice.p) * std::log(half / mu) / std::log(a));
    if (q > static_cast<double>(limits.max_burn_in)) {
      throw CapacityError("choose_truncation: requested eps needs burn_in beyond max_burn_in");
    }
    choice.burn_in = static_cast<std::size_t>(q);
    choice.burn_in_bound =
        mu * std::pow(a, static_cast<double>(choice.burn_in) / static_cast<double>(choice.p));
  }
  return choice;
}

ApproximationGapReport approximation_gap(const ChainModel& model, const OrliczFunction& phi,
                                         double tail_constant,
                                         std::span<const std::size_t> r_list, std::size_t reps,
                                         std::uint64_t seed, int threads, const Limits& limits) {
  if (r_list.empty()) throw std::domain_error("approximation_gap: empty r grid");
  if (reps == 0) throw std::domain_error("approximation_gap: need reps >= 1");
  const std::size_t r_max = *std::max_element(r_list.begin(), r_list.end());
  const std::size_t r_min = *std::min_element(r_list.begin(), r_list.end());
  if (r_min == 0) throw std::domain_error("approximation_gap: lags start at 1");

  ApproximationGapReport report;
  report.r_list.assign(r_list.begin(), r_list.end());
  report.replications = reps;

  // ||X_0||_Phi from an independent long run, then the closed-form bound per r.
  {
    SimulationPlan norm_plan;
    const TruncationChoice warmup = choose_truncation(model, phi, 1e-6, seed, limits);
    norm_plan.p = warmup.p;
    norm_plan.burn_in = warmup.burn_in;
    norm_plan.horizon = 200000;
    norm_plan.seed = seed ^ 0x5EEDBEEFULL;
    const SamplePath run = simulate_truncated(model, norm_plan, 0, limits);
    std::vector<double> norms(run.horizon());
    for (std::size_t t = 0; t < run.horizon(); ++t) norms[t] = state_norm(run.state(t));
    report.x0_norm_phi = {estimate_orlicz_norm(norms, phi), Provenance::Empirical, 0.0};
  }
  const double c_bar = std::abs(tail_constant);
  report.bound.reserve(r_list.size());
  double min_bound = std::numeric_limits<double>::infinity();
  for (std::size_t r : r_list) {
    const double b =
        approx_error_bound(model.coeffs(), report.x0_norm_phi.value, c_bar, r).value;
    report.bound.push_back(b);
    min_bound = std::min(min_bound, b);
  }

  // Reference chain truncated so its own error is negligible at every r.
  const TruncationChoice ref = choose_truncation(model, phi, min_bound / 100.0, seed, limits);
  report.reference_p = ref.p;
  report.reference_burn_in = ref.burn_in;

  const int d = model.dim();
  const auto block = static_cast<std::size_t>(d);
  const std::size_t pad = padding_length(model.coeffs(), tail_constant, limits);
  std::vector<double> gaps(reps * r_list.size());

  parallel_for(reps, threads, [&](std::size_t rep) {
    // shared innovation labels: absolute time t, offset by the burn-in
    const auto stream_at = [&](std::size_t s) {
      return Rng(seed, {stream_tag::kGapInnov, rep, s});
    };
    // reference path: starts at zero at time -burn_in, records t = 1..r_max
    std::vector<double> ref_states(r_max * block);
    run_truncated_chain(model, ref.p, ref.burn_in, r_max, stream_at,
                        [&](std::size_t t, std::span<const double> state) {
                          std::copy(state.begin(), state.end(),
                                    ref_states.begin() + (t - 1) * block);
                        });
    // recursive approximation driven by the same post-zero innovations
    std::vector<double> history((pad + r_max) * block, tail_constant);
    std::vector<double> out(block);
    std::vector<double> approx_states(r_max * block);
    for (std::size_t k = 1; k <= r_max; ++k) {
      Rng innovation = stream_at(ref.burn_in + k);
      const PastView past(history.data() + (pad + k - 1) * block, pad + k - 1, d);
      model.apply(past, innovation, out);
      std::copy(out.begin(), out.end(), history.begin() + (pad + k - 1) * block);
      std::copy(out.begin(), out.end(), approx_states.begin() + (k - 1) * block);
    }
    for (std::size_t i = 0; i < report.r_list.size(); ++i) {
      const std::size_t r = report.r_list[i];
      std::span<const double> xs(ref_states.data() + (r - 1) * block, block);
      std::span<const double> ys(approx_states.data() + (r - 1) * block, block);
      gaps[rep * report.r_list.size() + i] = state_gap(xs, ys);
    }
  });

  report.mean_gap.assign(r_list.size(), 0.0);
  report.ci_halfwidth.assign(r_list.size(), 0.0);
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    double mean = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) mean += gaps[rep * r_list.size() + i];
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const double dlt = gaps[rep * r_list.size() + i] - mean;
      var += dlt * dlt;
    }
    var = reps > 1 ? var / static_cast<double>(reps - 1) : 0.0;
    report.mean_gap[i] = mean;
    report.ci_halfwidth[i] = 1.96 * std::sqrt(var / static_cast<double>(reps));
  }
  return report;
}

}  // namespace infchain
