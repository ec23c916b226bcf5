#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace monsoon {

// Deterministic random source. The raw stream is std::mt19937_64 (bit-exact
// by the standard); every derived draw (uniform, normal, bounded int,
// shuffle, mask) is implemented here instead of through std::*_distribution,
// whose output is implementation-defined. Same seed, same sequence.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/polar-v1";

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Marsaglia's polar method (pairs cached)
  double normal();

  // uniform integer in [0, n), rejection-sampled (no modulo bias)
  std::uint64_t below(std::uint64_t n);

  // uniform shuffle of {0, .., n-1} (Fisher-Yates)
  std::vector<int> permutation(int n);

  // inverted-dropout keep mask: entry is 1 with probability 1 - drop_rate
  std::vector<std::uint8_t> bernoulli_keep_mask(std::size_t n, double drop_rate);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed (splitmix64 finalizer over base ^ salt).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace monsoon
