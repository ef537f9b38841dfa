#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "adaptix/dataset.hpp"

namespace adaptix {

/// Natural cubic smoothing spline: values and second derivatives at the
/// sorted design points. Linear beyond the end knots.
struct CssModel {
  std::vector<double> knots;
  std::vector<double> fitted;
  std::vector<double> second_derivs;  // zero at both ends
  double lambda = 0.0;

  void validate() const;
};

/// Minimizes sum_n (y_n - f(x_n))^2 + lambda * int f''(x)^2 dx.
/// Throws DomainError for duplicate design points, N < 3 or lambda < 0.
CssModel fit_css(const Dataset& data, double lambda);

double eval_css(const CssModel& model, double x);
std::vector<double> eval_css(const CssModel& model, std::span<const double> xs);

/// Thin-plate spline in 2D: sum_i a_i phi(|x - c_i|) + poly . (1, x1, x2),
/// phi(r) = r^2 log r.
struct TpsModel {
  std::vector<double> centers;  // N x 2, row-major
  std::vector<double> a;
  std::array<double, 3> poly{0.0, 0.0, 0.0};
  double lambda = 0.0;

  void validate() const;
};

double tps_kernel(double r);

/// Solves [[Phi + N lambda I, P], [P^T, 0]] [a; poly] = [y; 0].
/// Throws DomainError for duplicate points, collinear designs or N < 4.
TpsModel fit_tps(const Dataset& data, double lambda);

double eval_tps(const TpsModel& model, std::span<const double> x);
/// Points row-major N x 2.
std::vector<double> eval_tps(const TpsModel& model, std::span<const double> points, std::size_t count);

}  // namespace adaptix
