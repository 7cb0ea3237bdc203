#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lpnest {

// Seeded generator with deterministic substreams. All variate code is
// self-contained so that a given seed produces the same stream on any
// platform with IEEE doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  // Independent substream; successive calls yield distinct streams.
  Rng fork() { return Rng(mix(seed_ ^ mix(++forks_))); }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Marsaglia-Tsang squeeze method; shape-scale parametrization.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      return scale * g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
  }

  double sign() { return (gen_() & 1u) ? 1.0 : -1.0; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t forks_ = 0;
  std::mt19937_64 gen_;
};

}  // namespace lpnest
