#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "infchain/coefficients.hpp"
#include "infchain/estimate.hpp"
#include "infchain/orlicz.hpp"
#include "infchain/rng.hpp"

namespace infchain {

/// Read-only window onto the recent history of a chain, most recent first:
/// lag 1 is the previous state, lag 2 the one before, and so on. Lags beyond
/// the stored window read as zero, which matches maps defined on
/// finitely-non-zero past sequences.
///
/// Storage contract: `end` points one past the most recent state block of a
/// buffer holding at least `lags` consecutive state blocks in time order.
class PastView {
 public:
  PastView(const double* end, std::size_t lags, int dim)
      : end_(end), lags_(lags), dim_(dim) {}

  std::size_t lags() const { return lags_; }
  int dim() const { return dim_; }

  double coord(std::size_t lag, int k) const {
    if (lag == 0 || lag > lags_) return 0.0;
    return end_[-static_cast<std::ptrdiff_t>(lag * static_cast<std::size_t>(dim_)) + k];
  }

  /// Scalar state at the given lag (dimension-1 convenience).
  double scalar(std::size_t lag) const { return coord(lag, 0); }

  /// Copies the first n_lags blocks into `out` (size n_lags*dim), most recent
  /// first, zero-filling beyond the stored window.
  void copy_flat(std::span<double> out, std::size_t n_lags) const {
    for (std::size_t lag = 1; lag <= n_lags; ++lag) {
      for (int k = 0; k < dim_; ++k) out[(lag - 1) * dim_ + k] = coord(lag, k);
    }
  }

 private:
  const double* end_;
  std::size_t lags_;
  int dim_;
};

/// A chain model X_t = F(X_{t-1}, X_{t-2}, ...; xi_t): the map F, its
/// Lipschitz coefficient sequence, and an innovation scheme.
///
/// The innovation xi_t is realized lazily from a counter-based stream: apply()
/// draws whatever it needs from the Rng it is handed. Two calls with pasts x
/// and y and freshly constructed streams for the same label therefore see the
/// same innovation, which is exactly the coupling the simulation and
/// dependence layers rely on.
///
/// Models are immutable after construction and safe to share across threads.
class ChainModel {
 public:
  using ApplyFn = std::function<void(const PastView&, Rng&, std::span<double>)>;
  using PastEntryFn = std::function<void(Rng&, std::span<double>)>;
  using ClosedNormFn = std::function<std::optional<double>(const OrliczFunction&)>;

  /// Unchecked assembly, also the extension hook for user-supplied maps; the
  /// named constructors in model_zoo.hpp enforce the contraction condition,
  /// this one does not.
  static ChainModel custom(std::string name, int dim, ApplyFn apply, CoefficientSequence coeffs) {
    return ChainModel(std::move(name), dim, std::move(apply), std::move(coeffs));
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const CoefficientSequence& coeffs() const { return coeffs_; }

  void apply(const PastView& past, Rng& innovation, std::span<double> out) const {
    apply_(past, innovation, out);
  }

  /// ||F(0,0,...; xi)||_Phi in closed form when the model knows one.
  std::optional<double> closed_mu_phi(const OrliczFunction& phi) const {
    return closed_mu_phi_ ? closed_mu_phi_(phi) : std::nullopt;
  }

  /// E F(0,0,...;xi) ... stationary mean, in closed form when available.
  std::optional<double> closed_mean() const { return closed_mean_; }

  /// Closed-form stationary long-run variance, set for linear models.
  std::optional<double> closed_long_run_variance() const { return closed_lrv_; }

  /// Draws a plausible state value (used by the empirical Lipschitz check).
  void draw_past_entry(Rng& rng, std::span<double> out) const {
    if (past_entry_) {
      past_entry_(rng, out);
    } else {
      for (double& x : out) x = rng.normal();
    }
  }

  /// For affine models: declared lower bound on det M over all pasts, and the
  /// sup of the innovation density; both are needed by the density check.
  std::optional<double> det_lower_bound() const { return det_lower_bound_; }
  std::optional<double> innovation_density_sup() const { return innovation_density_sup_; }

  /// Whether the Lipschitz coefficients were derived in closed form or
  /// estimated from samples at construction.
  Provenance coeffs_provenance() const { return coeffs_provenance_; }

  // Builder-style setters used by the named constructors.
  ChainModel& with_closed_mu_phi(ClosedNormFn fn) {
    closed_mu_phi_ = std::move(fn);
    return *this;
  }
  ChainModel& with_closed_mean(double mean) {
    closed_mean_ = mean;
    return *this;
  }
  ChainModel& with_closed_long_run_variance(double value) {
    closed_lrv_ = value;
    return *this;
  }
  ChainModel& with_past_entry(PastEntryFn fn) {
    past_entry_ = std::move(fn);
    return *this;
  }
  ChainModel& with_density_data(double det_lower_bound, std::optional<double> density_sup) {
    det_lower_bound_ = det_lower_bound;
    innovation_density_sup_ = density_sup;
    return *this;
  }
  ChainModel& with_coeffs_provenance(Provenance p) {
    coeffs_provenance_ = p;
    return *this;
  }

 private:
  ChainModel(std::string name, int dim, ApplyFn apply, CoefficientSequence coeffs)
      : name_(std::move(name)), dim_(dim), apply_(std::move(apply)), coeffs_(std::move(coeffs)) {
    if (dim_ < 1) throw std::domain_error("ChainModel: dim must be >= 1");
    if (!apply_) throw std::invalid_argument("ChainModel: null apply");
  }

  std::string name_;
  int dim_;
  ApplyFn apply_;
  CoefficientSequence coeffs_;
  ClosedNormFn closed_mu_phi_;
  std::optional<double> closed_mean_;
  std::optional<double> closed_lrv_;
  PastEntryFn past_entry_;
  std::optional<double> det_lower_bound_;
  std::optional<double> innovation_density_sup_;
  Provenance coeffs_provenance_ = Provenance::ClosedForm;
};

inline double state_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

inline double state_gap(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace infchain
