#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cirforge {

// Deterministic random source: std::mt19937_64 with local distribution
// transforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, stream) pairs, e.g. one per dataset record.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  double exponential() { return -std::log(uniform_open_zero()); }
  std::uint64_t poisson(double mean);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cirforge
