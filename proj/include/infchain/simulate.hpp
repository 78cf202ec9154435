#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infchain/estimate.hpp"
#include "infchain/model.hpp"

namespace infchain {

/// Resource caps for simulation requests.
struct Limits {
  std::size_t max_state_values = 1'000'000'000;  // horizon x replications
  std::size_t max_truncation = 1'000'000;
  std::size_t max_burn_in = 1'000'000'000;
};

struct SimulationPlan {
  std::size_t p = 1;             // truncation order (>= 1)
  std::size_t burn_in = 0;
  std::size_t horizon = 1;       // recorded steps (>= 1)
  std::size_t replications = 1;  // >= 1
  std::uint64_t seed = 0;

  /// Throws on hard violations (zero counts, resource caps); returns soft
  /// warnings such as p > burn_in.
  std::vector<std::string> validate(const Limits& limits = {}) const;
};

struct SamplePath {
  std::vector<double> values;  // horizon x dim, row-major
  int dim = 1;
  SimulationPlan plan;
  std::string model_id;

  std::size_t horizon() const { return dim > 0 ? values.size() / static_cast<std::size_t>(dim) : 0; }
  double scalar(std::size_t t) const { return values[t * static_cast<std::size_t>(dim)]; }
  std::span<const double> state(std::size_t t) const {
    const auto d = static_cast<std::size_t>(dim);
    return {values.data() + t * d, d};
  }
};

/// Walks a window-truncated recursion. The past window starts as zeros; each
/// step draws its innovation from the stream it is handed and appends the new
/// state. Throws NumericError as soon as a non-finite value appears.
class ChainStepper {
 public:
  ChainStepper(const ChainModel& model, std::size_t window);

  void reset();
  std::span<const double> step(Rng& innovation);
  std::size_t steps_taken() const { return steps_; }

 private:
  const ChainModel* model_;
  std::size_t window_;
  std::size_t block_;
  std::size_t capacity_;  // in blocks
  std::size_t pos_ = 0;   // blocks written
  std::size_t steps_ = 0;
  std::vector<double> buf_;
  std::vector<double> scratch_;
};

/// Core runner: burn_in + horizon steps of the p-truncated recursion, with a
/// caller-supplied innovation stream per step (step indices start at 1) and a
/// sink for the recorded steps: sink(t, state) for t = 1..horizon.
template <typename StreamFn, typename Sink>
void run_truncated_chain(const ChainModel& model, std::size_t p, std::size_t burn_in,
                         std::size_t horizon, StreamFn&& stream_for_step, Sink&& sink) {
  ChainStepper stepper(model, p);
  for (std::size_t s = 1; s <= burn_in + horizon; ++s) {
    Rng innovation = stream_for_step(s);
    const auto state = stepper.step(innovation);
    if (s > burn_in) sink(s - burn_in, state);
  }
}

/// Zero-initialized p-truncated simulation: burn-in, then `horizon` recorded
/// values. Deterministic given (model, plan, replication).
SamplePath simulate_truncated(const ChainModel& model, const SimulationPlan& plan,
                              std::uint64_t replication = 0, const Limits& limits = {});

/// Two p-truncated paths: independent innovations during burn-in, the exact
/// same innovation stream afterwards. The gap between them at lag r bounds
/// the tau coefficient from above.
std::pair<SamplePath, SamplePath> simulate_coupled_pair(const ChainModel& model, std::size_t p,
                                                        std::size_t burn_in, std::size_t horizon,
                                                        std::uint64_t seed,
                                                        std::uint64_t replication = 0,
                                                        const Limits& limits = {});

/// Recursive approximation from nothing: step k applies the map to the full
/// generated history (X_{k-1},...,X_1) padded by the constant `tail_constant`.
/// With tail_constant = 0 the padding is exactly the zero past.
SamplePath recursive_approximation(const ChainModel& model, double tail_constant, std::size_t n,
                                   std::uint64_t seed, std::uint64_t replication = 0,
                                   const Limits& limits = {});

struct TruncationChoice {
  std::size_t p = 1;
  std::size_t burn_in = 0;
  double tail_bound = 0.0;     // mu_Phi A(p) / (1-a)^2 at the chosen p
  double burn_in_bound = 0.0;  // mu_Phi a^{burn_in/p}
  Estimate mu_phi;
};

/// Smallest truncation order with mu_Phi A(p)/(1-a)^2 <= eps/2, and smallest
/// burn-in with mu_Phi a^{burn_in/p} <= eps/2. Finite coefficient sequences
/// return their exact order (zero tail). eps = infinity returns (1, 0).
TruncationChoice choose_truncation(const ChainModel& model, const OrliczFunction& phi, double eps,
                                   std::uint64_t seed = 0x1C0FFEEULL, const Limits& limits = {});

struct ApproximationGapReport {
  std::vector<std::size_t> r_list;
  std::vector<double> mean_gap;       // E||X~_r - X_r|| estimates
  std::vector<double> ci_halfwidth;   // 95% normal CI
  std::vector<double> bound;          // closed-form approximation error bound
  std::size_t replications = 0;
  Estimate x0_norm_phi;               // ||X_0||_Phi used in the bound
  std::size_t reference_p = 0;        // truncation of the reference chain
  std::size_t reference_burn_in = 0;
};

/// Measures E||X~_r - X_r|| by coupling the recursive approximation with a
/// reference chain driven by the same innovations, the reference truncated
/// finely enough that its own error is below bound(r)/100. Compares against
/// the closed-form error bound at each r.
ApproximationGapReport approximation_gap(const ChainModel& model, const OrliczFunction& phi,
                                         double tail_constant,
                                         std::span<const std::size_t> r_list, std::size_t reps,
                                         std::uint64_t seed, int threads = 1,
                                         const Limits& limits = {});

}  // namespace infchain
