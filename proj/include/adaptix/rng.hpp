#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace adaptix {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `stream` of `seed`. Distinct streams of one seed never
/// collide in practice and do not overlap with the parent.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Portable random source. The engine is std::mt19937_64 (fully specified by
/// the standard); uniform and Gaussian transforms are implemented here rather
/// than through <random> distributions, whose outputs vary between standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

  /// Uniform direction on the unit sphere S^{d-1}.
  std::vector<double> unit_vector(std::size_t d);

  /// Uniform point in the closed unit ball: Gaussian direction times U^{1/d}.
  void ball_point(std::span<double> out);

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace adaptix
