#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adaptix/targets.hpp"

namespace adaptix {

/// How design points are placed.
struct Design {
  enum class Kind { Fixed, UniformBall };
  Kind kind = Kind::UniformBall;
  /// Fixed designs are equispaced on [lo, hi] (1D only).
  double lo = -1.0;
  double hi = 1.0;

  static Design fixed(double lo = -1.0, double hi = 1.0) { return {Kind::Fixed, lo, hi}; }
  static Design uniform_ball() { return {Kind::UniformBall, -1.0, 1.0}; }
};

/// N design points in the unit ball (row-major, N x d) with responses.
struct Dataset {
  std::size_t d = 1;
  std::vector<double> points;
  std::vector<double> y;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  Design design;

  std::size_t size() const noexcept { return y.size(); }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * d, d}; }

  /// Column-major copy of the points (coordinate j of point i at j * N + i).
  std::vector<double> columns() const;

  /// Subset with the given rows, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Checks the structural invariants; throws on violation.
  void validate() const;
};

/// Draws y_n = f(x_n) + sigma * eps_n. Design points come from stream 0 of
/// `seed` and noise from stream 1, so datasets that differ only in sigma share
/// their design.
Dataset make_dataset(const TargetFunction& target, std::size_t n, double sigma, std::uint64_t seed,
                     Design design);

/// Dataset from explicit points and responses (d inferred from `d`).
Dataset make_dataset(std::size_t d, std::vector<double> points, std::vector<double> y);

/// n equispaced points on [lo, hi]; n = 1 gives the midpoint.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// n points uniform in the d-dimensional unit ball (row-major), seeded.
std::vector<double> uniform_ball_points(std::size_t d, std::size_t n, std::uint64_t seed);

}  // namespace adaptix
