#include "adaptix/rng.hpp"

#include <cmath>
#include <numbers>

namespace adaptix {

double Rng::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::vector<double> Rng::unit_vector(std::size_t d) {
  std::vector<double> u(d);
  for (;;) {
    double norm2 = 0.0;
    for (auto& x : u) {
      x = normal();
      norm2 += x * x;
    }
    if (norm2 > 1e-300) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& x : u) x *= inv;
      return u;
    }
  }
}

void Rng::ball_point(std::span<double> out) {
  const auto dir = unit_vector(out.size());
  const double radius = std::pow(uniform(), 1.0 / static_cast<double>(out.size()));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = radius * dir[j];
}

}  // namespace adaptix
