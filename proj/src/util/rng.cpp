#include "cirforge/util/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cirforge {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_id) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL)));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0, 1] keeps the log finite.
  const double u1 = uniform_open_zero();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson mean must be finite and >= 0");
  // Sum of independent Poisson(<= 16) pieces, each drawn by Knuth's product method.
  std::uint64_t total = 0;
  double remaining = mean;
  while (remaining > 0.0) {
    const double chunk = remaining > 16.0 ? 16.0 : remaining;
    remaining -= chunk;
    const double limit = std::exp(-chunk);
    double prod = uniform_open_zero();
    while (prod > limit) {
      ++total;
      prod *= uniform_open_zero();
    }
  }
  return total;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below(0)");
  // Lemire-free rejection keeps this trivially portable.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace cirforge
