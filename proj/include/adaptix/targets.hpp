#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace adaptix {

enum class TargetKind { Inhomogeneous1D, GaussianMix2D, TriangleRidge2D, PureRidge };

std::string_view target_kind_name(TargetKind kind) noexcept;

/// Continuous piecewise-linear function through (knots[i], values[i]),
/// extended linearly beyond the end knots.
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;

  double operator()(double s) const;
};

struct GaussianBump {
  std::array<double, 2> center{};
  double scale = 1.0;
  double amplitude = 1.0;
};

struct Inhomogeneous1DParams {
  PiecewiseLinear profile;
};

struct GaussianMix2DParams {
  std::vector<GaussianBump> bumps;
};

/// f(x) = tri(w . x) with tri(0) = 0, period `period`, peak value `amplitude`.
struct TriangleRidge2DParams {
  std::array<double, 2> direction{1.0, 0.0};
  double period = 0.8;
  double amplitude = 1.0;
};

/// f(x) = profile(w . x) in any dimension.
struct PureRidgeParams {
  std::vector<double> direction;
  PiecewiseLinear profile;
};

using TargetParams =
    std::variant<Inhomogeneous1DParams, GaussianMix2DParams, TriangleRidge2DParams, PureRidgeParams>;

/// Closed-form ground-truth function on the closed unit ball.
class TargetFunction {
 public:
  /// Knots t_j = -1 + 2 (j/J)^2, j = 0..J, values alternating 0, 1, 0, ...
  static TargetFunction inhomogeneous_1d(std::size_t segments = 16);
  static TargetFunction inhomogeneous_1d(PiecewiseLinear profile);

  /// Three bumps: amplitudes 1.0 / 0.75 / 0.5, centers (-0.5,-0.3), (0.4,0.4),
  /// (0.1,-0.5), scales 0.2 / 0.15 / 0.25.
  static TargetFunction gaussian_mix_2d();
  static TargetFunction gaussian_mix_2d(std::vector<GaussianBump> bumps);

  /// Direction (cos angle, sin angle).
  static TargetFunction triangle_ridge_2d(double angle = 1.0, double period = 0.8,
                                          double amplitude = 1.0);
  static TargetFunction triangle_ridge_2d(std::array<double, 2> direction, double period,
                                          double amplitude);

  /// Direction is normalized; throws DomainError if it is zero.
  static TargetFunction pure_ridge(std::vector<double> direction, PiecewiseLinear profile);

  TargetKind kind() const noexcept;
  std::size_t dim() const noexcept { return dim_; }
  const TargetParams& params() const noexcept { return params_; }

  /// Throws DimensionError on size mismatch and DomainError if x lies outside
  /// the unit ball by more than 1e-9.
  double operator()(std::span<const double> x) const;

 private:
  TargetFunction(TargetParams params, std::size_t dim) : params_(std::move(params)), dim_(dim) {}

  TargetParams params_;
  std::size_t dim_;
};

inline double eval_target(const TargetFunction& target, std::span<const double> x) {
  return target(x);
}

/// Triangular wave with tri(0) = 0 and range [-amplitude, amplitude].
double triangle_wave(double s, double period, double amplitude);

}  // namespace adaptix
