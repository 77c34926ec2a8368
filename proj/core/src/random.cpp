#include "cmdp/random.hpp"

#include <cmath>

namespace cmdp {

namespace {
__extension__ using u128 = unsigned __int128;
}

int Rng::below(int n) {
  // Lemire's multiply-shift; bias is below 2^-32 for the sizes used here.
  const u128 product = static_cast<u128>(engine_()) * static_cast<std::uint64_t>(n);
  return static_cast<int>(product >> 64);
}

double Rng::exponential() { return -std::log1p(-uniform()); }

int Rng::categorical(std::span<const double> probs) {
  const double u = uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = static_cast<int>(i);
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = mix64(master);
  for (std::uint64_t step : path) state = mix64(state ^ mix64(step + 0x632BE59BD9B4E019ULL));
  return state;
}

std::vector<double> sample_simplex(int n, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& v : out) {
    v = rng.exponential();
    total += v;
  }
  if (total <= 0.0) {
    for (auto& v : out) v = 1.0 / n;
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

}  // namespace cmdp
