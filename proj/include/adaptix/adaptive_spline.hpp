#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adaptix/dataset.hpp"

namespace adaptix {

/// f(x) = beta0 + beta1 x + sum_j coeffs[j] relu(x - knots[j]).
/// Only knots with nonzero coefficients are stored.
struct SplineModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  std::vector<double> knots;
  std::vector<double> coeffs;

  std::size_t active_knots() const noexcept { return knots.size(); }
  void validate() const;
};

double eval_spline(const SplineModel& model, double x);

/// Evaluation at many points, O(log K) each.
std::vector<double> eval_spline(const SplineModel& model, std::span<const double> xs);

/// Second-order total variation: sum_j |coeffs[j]|.
double tv2(const SplineModel& model);

enum class TrendMethod {
  /// Sign-consistent active-set iteration with banded restricted solves
  /// (default knots only).
  ActiveSet,
  /// Cyclic coordinate descent with soft-threshold updates in the hinge basis.
  CoordinateDescent,
};

struct TrendSolverConfig {
  /// Stop when the KKT violation, relative to max(1, lambda), is below tol.
  double tol = 1e-10;
  std::size_t max_sweeps = 100000;
  TrendMethod method = TrendMethod::ActiveSet;
};

struct TrendDiagnostics {
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  /// Objective after every sweep (coordinate descent) or restricted solve
  /// (active set); non-increasing.
  std::vector<double> objective_history;
};

struct TrendFit {
  SplineModel model;
  TrendDiagnostics diagnostics;
};

/// Minimizes sum_n (y_n - f(x_n))^2 + lambda * sum_j |c_j| over linear
/// splines with candidate knots at the interior design points (or at
/// `knot_grid` when given). `warm` seeds the active-set solver.
/// Throws DomainError for lambda < 0, duplicate design points or N < 2.
TrendFit fit_trend(const Dataset& data, double lambda, std::optional<std::vector<double>> knot_grid = {},
                   const TrendSolverConfig& solver = {}, const SplineModel* warm = nullptr);

/// Smallest lambda for which the fit is affine (default knots):
/// max_j 2 |A_j^T (y - affine least-squares fit)|.
double trend_lambda_max(const Dataset& data);

/// Objective value of `model` on `data` at `lambda`.
double trend_objective(const SplineModel& model, const Dataset& data, double lambda);

/// Maximum KKT violation of `model` on `data` with candidate knots at the
/// interior design points, divided by max(1, lambda). Knots of the model
/// must be a subset of those points.
double trend_kkt_residual(const SplineModel& model, const Dataset& data, double lambda);

}  // namespace adaptix
