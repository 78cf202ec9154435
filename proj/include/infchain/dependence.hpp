#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "infchain/bounds.hpp"
#include "infchain/model.hpp"
#include "infchain/simulate.hpp"

namespace infchain {

/// Monte Carlo estimate of the coupling gap E||X_r - X*_r|| at lag r. The
/// population value dominates the tau coefficient at lag r, so the estimate
/// is an upper-bound proxy for tau, not tau itself.
struct TauEstimate {
  std::size_t r = 0;
  double mean_abs_gap = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal CI
  std::size_t n_reps = 0;
};

/// Generates plan.replications coupled pairs and records the gap at each lag
/// in r_list. plan.p == 0 requests automatic truncation: (p, burn_in) are
/// chosen so the truncation error is below bound(r_max)/100 and the resolved
/// values are written back into the returned estimates' plan. Deterministic
/// given the seed, for any thread count.
struct TauEstimateRun {
  std::vector<TauEstimate> estimates;
  SimulationPlan resolved_plan;
  Estimate mu_1;
};

TauEstimateRun estimate_tau(const ChainModel& model, std::span<const std::size_t> r_list,
                            const SimulationPlan& plan, int threads = 1,
                            const Limits& limits = {});

struct TauComparison {
  TauEstimate estimate;
  double bound = 0.0;
  std::size_t argmin_p = 1;
  double ratio = 0.0;  // estimate / bound
  bool pass = false;   // mean - ci <= bound
};

/// Per-lag verdicts of coupling-gap estimates against the closed-form bound.
std::vector<TauComparison> compare_to_bound(std::span<const TauEstimate> estimates,
                                            const CoefficientSequence& coeffs, double mu_1);

/// Same, against a precomputed bound table; the grids must match exactly.
std::vector<TauComparison> compare_to_bound(std::span<const TauEstimate> estimates,
                                            std::span<const TauBound> bounds);

}  // namespace infchain
