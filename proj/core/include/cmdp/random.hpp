#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace cmdp {

// Every draw is built from raw 64-bit engine output so results do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n).
  int below(int n);

  /// Standard exponential variate.
  double exponential();

  /// Index drawn from a probability vector.
  int categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic child seed for a stream addressed by `path` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Uniform draw from the probability simplex over `n` points (Dirichlet(1,...,1)).
std::vector<double> sample_simplex(int n, Rng& rng);

}  // namespace cmdp
