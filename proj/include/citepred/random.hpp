#pragma once

#include <cstdint>
#include <limits>

namespace citepred {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator. Draw k of stream s under seed q is
///
///   key  = mix64(q ^ mix64(s + 0x632BE59BD9B4E019))
///   x_k  = mix64(key + 0x9E3779B97F4A7C15 * k),   k = 1, 2, ...
///
/// so any (seed, stream, k) triple can be reproduced in another language
/// with 64-bit unsigned arithmetic. All distributions below are built from
/// `uniform()` with explicit algorithms; no std:: distribution is used
/// because their output is implementation-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, n), n ≥ 1 (Lemire-free modulo rejection).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box–Muller (one draw per call, two uniforms).
  double normal();
  double bernoulli(double p) { return uniform() < p ? 1.0 : 0.0; }
  /// Poisson: inversion for mean < 10, Hörmann's PTRS otherwise.
  std::uint64_t poisson(double mean);
  /// Gamma(shape, 1) via Marsaglia–Tsang; shape < 1 uses the U^{1/shape} boost.
  double gamma(double shape);
  /// NB2 draw with mean mu and dispersion psi (gamma–Poisson mixture).
  std::uint64_t negbin(double mu, double psi);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace citepred
