#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tofra {

// Seeded PRNG for reproducible experiments. All draws are hand-rolled on top
// of mt19937_64 so sequences do not depend on the standard library's
// distribution implementations: the same seed gives the same stream on every
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  bool bernoulli(double p) { return uniform() < p; }

  // Exponential with the given mean (mean = 1 / rate).
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  double gaussian(double mean, double stddev) {
    // Box-Muller; two uniforms per draw, no state carried between calls.
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.28318530717958647692 * u2);
  }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Derives an independent child seed from a base seed and an index path
// (e.g. {scenario, gamma, scheme, replication}). Pure function of its inputs,
// so derived streams never depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = detail::splitmix64(base);
  for (std::uint64_t p : path) s = detail::splitmix64(s ^ (p + 0x9E3779B97F4A7C15ULL));
  return s;
}

}  // namespace tofra
