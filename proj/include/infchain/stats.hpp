#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "infchain/estimate.hpp"
#include "infchain/model.hpp"
#include "infchain/simulate.hpp"

namespace infchain {

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

struct KsResult {
  double distance = 0.0;
  double p_value = 1.0;
};

/// Exact one-sample sup distance against a monotone cdf; p-value from the
/// asymptotic Kolmogorov series truncated at 100 terms.
KsResult ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

double standard_normal_cdf(double x);

// ---------------------------------------------------------------------------
// Long-run variance
// ---------------------------------------------------------------------------

enum class LrvMethod { TruncatedAutocovariance, BatchMeans };

struct LrvOptions {
  std::size_t lag_cap = 0;    // 0 -> ceil(n^{1/3})
  std::size_t batch_len = 0;  // 0 -> ceil(sqrt(n))
};

struct LrvEstimate {
  double value = 0.0;
  LrvMethod method = LrvMethod::TruncatedAutocovariance;
  std::size_t window = 0;  // lag cap or batch length actually used
  bool nonpositive_warning = false;
};

/// gamma_0 + 2 sum_{i<=L} (1 - i/(L+1)) gamma_i  (triangular taper), or
/// batch_len x variance of batch means. Centering uses the sample mean, so
/// adding a constant to the path changes nothing.
LrvEstimate estimate_long_run_variance(std::span<const double> path, LrvMethod method,
                                       const LrvOptions& options = {});

/// Simulates a stationary stretch of length n first (burn-in chosen
/// automatically), then estimates.
LrvEstimate estimate_long_run_variance(const ChainModel& model, LrvMethod method, std::size_t n,
                                       std::uint64_t seed, const LrvOptions& options = {});

// ---------------------------------------------------------------------------
// Limit-theorem diagnostics
// ---------------------------------------------------------------------------

/// Resolves E X_0: the model's closed form if it has one, otherwise the mean
/// of an independent long run (flagged empirical).
Estimate stationary_mean(const ChainModel& model, std::uint64_t seed, std::size_t n = 200000);

struct SllnReport {
  double q = 0.0;
  std::vector<std::size_t> n_grid;
  std::vector<double> medians;  // median over reps of |n^{-1/q} S_n|
  std::vector<double> ratios;   // medians[i] / medians[i-1]
  Estimate mean0;
  bool pass = false;  // medians strictly decreasing
};

/// Partial-sum law-of-large-numbers diagnostic at rate n^{-1/q}, 1 < q < 2.
SllnReport slln_diagnostic(const ChainModel& model, double q,
                           std::span<const std::size_t> n_grid, std::size_t reps,
                           std::uint64_t seed, std::optional<double> mean0 = std::nullopt,
                           int threads = 1);

struct CltReport {
  std::vector<double> t_grid;
  std::vector<std::size_t> cuts;  // [n t]
  std::vector<KsResult> ks;
  Estimate sigma2;
  double p_threshold = 0.01;
  bool pass = false;
};

/// Functional CLT check: for each t, the replication values of
/// n^{-1/2} S_{[nt]} / sqrt(sigma^2 t) are KS-tested against the standard
/// normal; passes when every p-value clears the threshold.
CltReport clt_test(const ChainModel& model, std::size_t n, std::size_t reps,
                   std::optional<double> sigma2, std::span<const double> t_grid,
                   std::uint64_t seed, std::optional<double> mean0 = std::nullopt,
                   double p_threshold = 0.01, int threads = 1);

struct SipReport {
  double band_lo = 0.5, band_hi = 2.0;
  double p10 = 0.0, p50 = 0.0, p90 = 0.0;
  std::size_t reps = 0;
  std::size_t n = 0;
  bool pass = false;  // p90 inside the band
  // The coupled Gaussian partner sequence is not constructible from one
  // realization, so this only checks the iterated-logarithm normalization
  // the coupling implies.
};

/// R = max over dyadic k <= n of |S_k| / sqrt(2 sigma^2 k ln ln k), summarized
/// over replications; the 90th percentile should sit in the band.
SipReport sip_lil_diagnostic(const ChainModel& model, double sigma2, std::size_t n,
                             std::size_t reps, std::uint64_t seed,
                             std::optional<double> mean0 = std::nullopt, double band_lo = 0.5,
                             double band_hi = 2.0, int threads = 1);

struct DensityReport {
  int n_joint = 1;
  double kde_sup = 0.0;
  double bound = 0.0;   // det_lb^{-n} density_sup^n
  double slack = 0.15;  // smoothing allowance on the verdict
  double bandwidth = 0.0;
  double bandwidth2 = 0.0;  // second coordinate, joint case
  std::size_t samples = 0;
  bool pass = false;
  std::vector<double> grid;      // evaluation grid (x, or x,y pairs flattened)
  std::vector<double> values;    // kde values on the grid
  std::size_t grid_cols = 1;
};

/// Gaussian-kernel density estimate (Silverman bandwidth) of the marginal
/// (n_joint = 1) or the consecutive-pair joint density (n_joint = 2) on a
/// stationary run; passes when sup KDE <= bound * (1 + slack). The model must
/// declare det_lower_bound and an innovation density sup.
DensityReport density_bound_check(const ChainModel& model, int n_joint, std::size_t n_samples,
                                  std::uint64_t seed, double slack = 0.15,
                                  std::size_t grid_points = 0);

}  // namespace infchain
