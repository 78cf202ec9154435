#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "infchain/estimate.hpp"
#include "infchain/model.hpp"
#include "infchain/samplers.hpp"

namespace infchain {

inline constexpr std::uint64_t kConstructionSeed = 0x1C0FFEEULL;

/// ||X||_Phi for the sampler's law: closed form when one exists, otherwise a
/// Monte Carlo estimate flagged as empirical (with a 95% batch CI).
Estimate sampler_orlicz_norm(const Sampler& sampler, const OrliczFunction& phi,
                             std::size_t n = 100000, std::uint64_t seed = kConstructionSeed);

/// mu_Phi = ||F(0,0,...;xi_0)||_Phi for a model: the model's closed form if it
/// declares one, else Monte Carlo over F applied to the zero past.
Estimate mu_phi_report(const ChainModel& model, const OrliczFunction& phi,
                       std::size_t n = 100000, std::uint64_t seed = kConstructionSeed);

// ---------------------------------------------------------------------------
// Model constructors. Each enforces its contraction condition (summed
// Lipschitz coefficients < 1) and throws ContractionViolation otherwise.
// All shipped constructors are scalar (dim 1); higher-dimensional maps go
// through ChainModel::custom.
// ---------------------------------------------------------------------------

/// One scalar link per lag, g_j with declared Lipschitz constant.
struct LagLink {
  std::function<double(double)> fn;
  double lip;
};

/// X_t = R(X_{t-1},...,X_{t-p}) + xi_t, with declared per-lag constants.
ChainModel nonlinear_ar(std::function<double(const PastView&)> map,
                        CoefficientSequence coeffs, Sampler noise);

/// R(x) = sum_j links[j].fn(x_j).
ChainModel nonlinear_ar_links(std::vector<LagLink> links, Sampler noise);

/// Linear autoregression X_t = sum_j w_j X_{t-j} + xi_t. Knows its stationary
/// mean and long-run variance in closed form.
ChainModel linear_ar(std::vector<double> weights, Sampler noise);

/// Random-affine recursion X_t = A_t X_{t-1} + B_t with iid (A_t, B_t).
/// The contraction coefficient a_1 = ||A||_Phi is closed-form when the
/// sampler admits one and an empirical estimate otherwise (flagged).
ChainModel sre_random_affine(Sampler a_sampler, Sampler b_sampler, const OrliczFunction& phi,
                             std::uint64_t seed = kConstructionSeed);

/// Branching with immigration: X_t = u_0 + sum_{i=1}^{X_{t-1}} u_i.
/// AbsorbingAtZero freezes the chain at 0 once it hits 0 (so the stationary
/// causal solution is identically zero); StandardImmigration lets immigration
/// restart it and is the default for experiments.
enum class GwVariant { StandardImmigration, AbsorbingAtZero };
ChainModel galton_watson_immigration(Sampler offspring, Sampler immigration, GwVariant variant,
                                     const OrliczFunction& phi,
                                     std::uint64_t seed = kConstructionSeed);

/// Nonlinear ARCH with one link per lag: X_t = xi_t (alpha + sum_j g_j(X_{t-j})).
ChainModel nl_arch(double alpha, std::vector<LagLink> links, Sampler noise,
                   const OrliczFunction& phi, std::uint64_t seed = kConstructionSeed);

/// Linear ARCH with infinitely many lags: X_t = xi_t (alpha + sum_j c_j X_{t-j}).
/// The c_j come from a coefficient sequence, so geometric and polynomial
/// profiles keep closed-form tails.
ChainModel larch(double alpha, CoefficientSequence c, Sampler noise, const OrliczFunction& phi,
                 std::uint64_t seed = kConstructionSeed);

/// Linear-input model X_t = f(A_t, xi_t) with A_t = sum_j c_j X_{t-j} and f
/// Lipschitz in its first argument with declared constant f_lip.
ChainModel linear_input(std::function<double(double, double)> f, double f_lip,
                        CoefficientSequence c, Sampler noise,
                        std::optional<double> known_mean = std::nullopt);

/// Additive-link special case f(t, s) = link(t) + s with link(0) = 0.
ChainModel linear_input_link(std::function<double(double)> link, double link_lip,
                             CoefficientSequence c, Sampler noise);

/// A scalar map of the past with declared per-lag Lipschitz constants.
struct PastMap {
  std::function<double(const PastView&)> fn;
  std::vector<double> lip;
};
PastMap past_map_zero();
PastMap past_map_const(double value);
PastMap past_map_linear(std::vector<double> weights);
/// x -> sqrt(omega + alpha x_1^2); Lipschitz constant sqrt(alpha), lower
/// bound sqrt(omega).
PastMap past_map_arch(double omega, double alpha);

/// Affine model X_t = M(past) xi_t + f(past). Contraction requires
/// ||xi||_Phi sum Lip M_i + sum Lip f_i < 1. `det_lower_bound` is the declared
/// lower bound on M over all pasts, needed by the joint-density check; pass
/// nullopt when density checks are not wanted.
ChainModel affine_model(PastMap m_map, PastMap f_map, Sampler noise, const OrliczFunction& phi,
                        std::optional<double> det_lower_bound,
                        std::uint64_t seed = kConstructionSeed,
                        std::optional<double> known_mean = std::nullopt);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ContractionReport {
  Estimate a;       // summed Lipschitz coefficients
  Estimate mu_1;    // ||F(0,...;xi)||_1
  Estimate mu_phi;  // ||F(0,...;xi)||_Phi
  bool sum_ok = false;
  bool moment_ok = false;
  bool pass() const { return sum_ok && moment_ok; }
};

/// Verdicts on the two stationarity conditions (a < 1, mu_Phi finite);
/// failures are verdicts, not errors.
ContractionReport validate_contraction(const ChainModel& model, const OrliczFunction& phi,
                                       std::size_t mc_samples = 100000,
                                       std::uint64_t seed = kConstructionSeed);

struct LipschitzCheckReport {
  double worst_ratio = 0.0;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  std::size_t n_pairs = 0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Samples random past pairs differing in a random subset of lags, estimates
/// ||F(x;xi) - F(y;xi)||_Phi over fresh innovations, and compares it with
/// sum_j a_j ||x_j - y_j||. Passes when the worst ratio is <= 1 + tolerance.
LipschitzCheckReport empirical_lipschitz_check(const ChainModel& model, const OrliczFunction& phi,
                                               std::size_t n_pairs, std::size_t past_len,
                                               std::uint64_t seed,
                                               std::size_t innovations_per_pair = 10000,
                                               double tolerance = 0.05);

}  // namespace infchain
