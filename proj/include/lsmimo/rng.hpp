// Deterministic random-number layer. All distribution transforms are written
// out explicitly (never std::*_distribution, whose algorithms are
// implementation-defined) so that a master seed reproduces bit-identical
// streams on any platform.
//
// Seeding scheme, documented as the project-wide split rule:
//   realization_seed(master, i) = splitmix64 mix of (master, i)
//   channel_seed(realization_seed, user, bs) = splitmix64 mix of the triple
// Channel draws are keyed by (realization, user, bs) rather than consumed from
// a shared stream, so the set or order of channel lookups cannot perturb other
// draws; identical pairs yield identical fades in any clustering mode.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "lsmimo/types.hpp"

namespace lsmimo {

// Finalizing 64-bit mix (splitmix64 increment + avalanche).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  (void)splitmix64_next(s);
  s ^= b + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
  return splitmix64_next(s);
}

// Child seed for realization `index` under `master`; workers may process
// realizations in any order because each realization owns its stream.
inline std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(master, 0x52454Cull ^ index);
}

// Key for the fading vector between `user` and `bs` within one realization.
inline std::uint64_t channel_seed(std::uint64_t realization, std::uint64_t user, std::uint64_t bs) {
  return mix_seed(mix_seed(realization, 0x4348414Eull ^ user), bs);
}

// Stateful generator wrapping mt19937_64 with explicit transforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer on [0, n), n >= 1, by rejection (no modulo bias).
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % n;
  }

  // Unit-rate exponential; log1p keeps accuracy near u = 0.
  double exponential() { return -std::log1p(-uniform()); }

  // One CN(0,1) draw: exponential magnitude-squared, uniform phase.
  cscalar complex_gaussian() {
    const double mag = std::sqrt(exponential());
    const double ph = 6.283185307179586476925286766559 * uniform();
    return {mag * std::cos(ph), mag * std::sin(ph)};
  }

  // Pair of independent N(0,1) draws (Box-Muller).
  void normal_pair(double& z0, double& z1) {
    const double r = std::sqrt(2.0 * exponential());
    const double ph = 6.283185307179586476925286766559 * uniform();
    z0 = r * std::cos(ph);
    z1 = r * std::sin(ph);
  }

  // Poisson(mean) by counting unit-rate arrivals; exact for any mean, O(mean).
  std::uint64_t poisson(double mean) {
    std::uint64_t count = 0;
    double t = exponential();
    while (t <= mean) {
      ++count;
      t += exponential();
    }
    return count;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

} // namespace lsmimo
