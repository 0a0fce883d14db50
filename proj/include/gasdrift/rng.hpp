// Deterministic random number generation.
//
// The project uses one generator everywhere: xoshiro256++ seeded through
// splitmix64 (Blackman & Vigna). Both are fully specified bit-level
// algorithms, so a seed reproduces the same stream on any platform.
// Gaussian draws use the inverse-CDF transform (Acklam's rational
// approximation polished by one Halley step), consuming exactly one
// uniform per normal deviate — every draw has a fixed position in the
// stream.
//
// Stage seeds are derived from a master seed with derive_seed(master, tag);
// the tag identifies the stream (per-gas data, weight init, shuffling,
// dropout masks, ...), so one master seed reproduces a whole pipeline.

#pragma once

#include <array>
#include <cstdint>

namespace gasdrift::rng {

/// splitmix64: 64-bit state increment + finalizer. Used to expand seeds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Derive an independent stream seed from (master, tag).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  SplitMix64 g(master ^ (tag * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
  return g.next();
}

/// xoshiro256++ engine, state filled from the seed via splitmix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double strictly inside (0, 1): 53-bit mantissa, half-ulp
  /// offset keeps 0 and 1 unreachable (required by the inverse CDF).
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform in [0, n) by rejection-free Lemire-style reduction is not
  /// needed here; modulo bias at n << 2^64 is negligible for shuffling,
  /// but use the unbiased bounded draw anyway.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal deviate via the inverse CDF; one uniform consumed.
  double normal();

  /// Normal with the given mean and standard deviation.
  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
};

/// Inverse of the standard normal CDF on (0, 1).
/// Acklam's rational approximation refined with one Halley iteration
/// against erfc; absolute error is at the few-ulp level.
double normal_quantile(double p);

/// Standard normal CDF (via erfc); used by tests as the oracle for
/// normal_quantile round trips.
double normal_cdf(double x);

}  // namespace gasdrift::rng
