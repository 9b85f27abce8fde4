#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace roadgp {

/// splitmix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded generator with platform-independent uniform and normal draws.
///
/// The standard library distributions are implementation-defined, so the
/// transforms are spelled out here: 53-bit uniforms and polar-free
/// Box-Muller normals (the second variate of each pair is cached).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace roadgp
