#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

#include "infchain/errors.hpp"

namespace infchain {

namespace detail {

// SplitMix64 finalizer, used to derive stream labels from (seed, ids...).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream (Philox4x32-10, Salmon et al.).
///
/// A stream is labelled by a 128-bit value hashed from (seed, ids...); draws
/// walk a 64-bit block counter. Distinctly labelled streams are statistically
/// independent and can be created and consumed in any order, which makes
/// replication-parallel Monte Carlo deterministic regardless of scheduling:
/// every consumer derives its own stream from (seed, tag, replication, time)
/// instead of sharing a sequential generator.
class Rng {
 public:
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = detail::mix64(seed + 0x9E3779B97F4A7C15ULL);
    for (std::uint64_t id : ids) h = detail::mix64(h ^ (id + 0x9E3779B97F4A7C15ULL));
    key0_ = static_cast<std::uint32_t>(h);
    key1_ = static_cast<std::uint32_t>(h >> 32);
    const std::uint64_t h2 = detail::mix64(h);
    lane2_ = static_cast<std::uint32_t>(h2);
    lane3_ = static_cast<std::uint32_t>(h2 >> 32);
  }

  std::uint64_t next_u64() {
    if (have_spare_u64_) {
      have_spare_u64_ = false;
      return spare_u64_;
    }
    const auto b = block(counter_++);
    spare_u64_ = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    have_spare_u64_ = true;
    return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  }

  /// Uniform on the open interval (0,1).
  double u01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * u01(); }

  bool bernoulli(double p) { return u01() < p; }

  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (have_spare_normal_) {
      have_spare_normal_ = false;
      return spare_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(u01()));
    const double angle = 2.0 * std::numbers::pi * u01();
    spare_normal_ = radius * std::sin(angle);
    have_spare_normal_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson by sequential inversion, chunked so large means stay in range.
  long poisson(double lambda) {
    if (lambda < 0) throw std::domain_error("poisson: lambda must be >= 0");
    long total = 0;
    while (lambda > 0) {
      const double chunk = std::min(lambda, 30.0);
      lambda -= chunk;
      double pmf = std::exp(-chunk);
      double cdf = pmf;
      const double u = u01();
      long k = 0;
      while (u > cdf && k < 1000) {
        ++k;
        pmf *= chunk / static_cast<double>(k);
        cdf += pmf;
      }
      total += k;
    }
    return total;
  }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t n) const {
    std::uint32_t c0 = static_cast<std::uint32_t>(n);
    std::uint32_t c1 = static_cast<std::uint32_t>(n >> 32);
    std::uint32_t c2 = lane2_;
    std::uint32_t c3 = lane3_;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * c0;
      const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9U;
      k1 += 0xBB67AE85U;
    }
    return {c0, c1, c2, c3};
  }

  std::uint32_t key0_, key1_, lane2_, lane3_;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_u64_ = 0;
  double spare_normal_ = 0.0;
  bool have_spare_u64_ = false;
  bool have_spare_normal_ = false;
};

// Stream tags keep independently consumed streams from colliding. New call
// sites must use fresh tags, never reuse one with overlapping id tuples.
namespace stream_tag {
inline constexpr std::uint64_t kSimulate = 1;
inline constexpr std::uint64_t kCoupledShared = 2;
inline constexpr std::uint64_t kCoupledBurnIn = 3;
inline constexpr std::uint64_t kMoment = 4;
inline constexpr std::uint64_t kLipschitzPast = 5;
inline constexpr std::uint64_t kLipschitzInnov = 6;
inline constexpr std::uint64_t kRecursive = 7;
inline constexpr std::uint64_t kStats = 8;
inline constexpr std::uint64_t kNormEstimate = 9;
inline constexpr std::uint64_t kGapInnov = 10;
}  // namespace stream_tag

}  // namespace infchain
