#pragma once

#include <cstdint>
#include <random>

namespace tbnn {

// Deterministic RNG with explicit output transforms. std::*_distribution is
// implementation-defined, so uniform and gaussian draws are derived from the
// raw mt19937_64 stream directly; a given seed yields the same sequence on
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform();
  // uniform in [lo, hi)
  double uniform(double lo, double hi);
  // standard normal via Box-Muller (pairs cached)
  double normal();

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 step; used to derive independent sub-seeds from one master seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace tbnn
