#include "adaptix/targets.hpp"

#include <algorithm>
#include <cmath>

#include "adaptix/error.hpp"

namespace adaptix {

std::string_view target_kind_name(TargetKind kind) noexcept {
  switch (kind) {
    case TargetKind::Inhomogeneous1D: return "inhom1d";
    case TargetKind::GaussianMix2D: return "gauss2d";
    case TargetKind::TriangleRidge2D: return "ridge2d";
    case TargetKind::PureRidge: return "pureridge";
  }
  return "unknown";
}

double PiecewiseLinear::operator()(double s) const {
  const std::size_t m = knots.size();
  if (m == 0) return 0.0;
  if (m == 1) return values[0];
  // segment index i with knots[i] <= s < knots[i+1], clamped to the end segments
  auto it = std::upper_bound(knots.begin(), knots.end(), s);
  std::size_t i = static_cast<std::size_t>(it - knots.begin());
  i = std::clamp<std::size_t>(i, 1, m - 1) - 1;
  if (s == knots[i]) return values[i];
  if (s == knots[i + 1]) return values[i + 1];
  const double t = (s - knots[i]) / (knots[i + 1] - knots[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

double triangle_wave(double s, double period, double amplitude) {
  const double u = s - 0.25 * period;
  const double phase = u - period * std::floor(u / period);  // [0, period)
  return (4.0 * amplitude / period) * std::abs(phase - 0.5 * period) - amplitude;
}

namespace {

void check_profile(const PiecewiseLinear& p) {
  if (p.knots.size() != p.values.size() || p.knots.empty())
    throw DomainError("piecewise-linear profile needs matching, nonempty knots and values");
  for (std::size_t i = 1; i < p.knots.size(); ++i)
    if (!(p.knots[i] > p.knots[i - 1])) throw DomainError("profile knots must be strictly increasing");
}

std::vector<double> normalized(std::vector<double> w) {
  double n2 = 0.0;
  for (double x : w) n2 += x * x;
  if (!(n2 > 0.0)) throw DomainError("ridge direction must be nonzero");
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : w) x *= inv;
  return w;
}

}  // namespace

TargetFunction TargetFunction::inhomogeneous_1d(std::size_t segments) {
  if (segments == 0) throw DomainError("inhomogeneous_1d needs at least one segment");
  PiecewiseLinear p;
  const double J = static_cast<double>(segments);
  for (std::size_t j = 0; j <= segments; ++j) {
    const double r = static_cast<double>(j) / J;
    p.knots.push_back(-1.0 + 2.0 * r * r);
    p.values.push_back(j % 2 == 0 ? 0.0 : 1.0);
  }
  return inhomogeneous_1d(std::move(p));
}

TargetFunction TargetFunction::inhomogeneous_1d(PiecewiseLinear profile) {
  check_profile(profile);
  return {Inhomogeneous1DParams{std::move(profile)}, 1};
}

TargetFunction TargetFunction::gaussian_mix_2d() {
  return gaussian_mix_2d({GaussianBump{{-0.5, -0.3}, 0.2, 1.0}, GaussianBump{{0.4, 0.4}, 0.15, 0.75},
                          GaussianBump{{0.1, -0.5}, 0.25, 0.5}});
}

TargetFunction TargetFunction::gaussian_mix_2d(std::vector<GaussianBump> bumps) {
  for (const auto& g : bumps)
    if (!(g.scale > 0.0)) throw DomainError("Gaussian scale must be positive");
  return {GaussianMix2DParams{std::move(bumps)}, 2};
}

TargetFunction TargetFunction::triangle_ridge_2d(double angle, double period, double amplitude) {
  return triangle_ridge_2d({std::cos(angle), std::sin(angle)}, period, amplitude);
}

TargetFunction TargetFunction::triangle_ridge_2d(std::array<double, 2> direction, double period,
                                                 double amplitude) {
  if (!(period > 0.0)) throw DomainError("triangle period must be positive");
  const auto w = normalized({direction[0], direction[1]});
  return {TriangleRidge2DParams{{w[0], w[1]}, period, amplitude}, 2};
}

TargetFunction TargetFunction::pure_ridge(std::vector<double> direction, PiecewiseLinear profile) {
  check_profile(profile);
  auto w = normalized(std::move(direction));
  const std::size_t d = w.size();
  return {PureRidgeParams{std::move(w), std::move(profile)}, d};
}

TargetKind TargetFunction::kind() const noexcept {
  return static_cast<TargetKind>(params_.index());
}

double TargetFunction::operator()(std::span<const double> x) const {
  if (x.size() != dim_)
    throw DimensionError("target of dimension " + std::to_string(dim_) + " evaluated at point of dimension " +
                         std::to_string(x.size()));
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  if (std::sqrt(n2) > 1.0 + 1e-9) throw DomainError("point outside the closed unit ball");

  struct Visitor {
    std::span<const double> x;
    double operator()(const Inhomogeneous1DParams& p) const { return p.profile(x[0]); }
    double operator()(const GaussianMix2DParams& p) const {
      double f = 0.0;
      for (const auto& g : p.bumps) {
        const double dx = x[0] - g.center[0];
        const double dy = x[1] - g.center[1];
        f += g.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * g.scale * g.scale));
      }
      return f;
    }
    double operator()(const TriangleRidge2DParams& p) const {
      return triangle_wave(p.direction[0] * x[0] + p.direction[1] * x[1], p.period, p.amplitude);
    }
    double operator()(const PureRidgeParams& p) const {
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) s += p.direction[j] * x[j];
      return p.profile(s);
    }
  };
  return std::visit(Visitor{x}, params_);
}

}  // namespace adaptix
