#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adaptix/adaptive_spline.hpp"
#include "adaptix/dataset.hpp"
#include "adaptix/relu_net.hpp"
#include "adaptix/smoothers.hpp"
#include "adaptix/targets.hpp"

namespace adaptix {

enum class EstimatorKind { ReluNet, TrendFilter, Css, Tps };

std::string_view estimator_name(EstimatorKind kind) noexcept;

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::TrendFilter;
  /// ReluNet only; lambda is overwritten per fit, width 0 means width N and
  /// step_size <= 0 means suggested_step_size(data).
  TrainConfig train;
  TrendSolverConfig trend;
};

using FittedModel = std::variant<NetworkParams, SplineModel, CssModel, TpsModel>;

/// Fits the estimator at one regularization level. `warm` (trend filter only)
/// seeds the solver.
FittedModel fit_estimator(const EstimatorSpec& spec, const Dataset& data, double lambda,
                          const FittedModel* warm = nullptr);

/// Predictions at the rows of a row-major point matrix of dimension d.
std::vector<double> predict(const FittedModel& model, std::span<const double> points, std::size_t d);

std::size_t model_dim(const FittedModel& model);

/// Quadrature points for population MSE.
struct EvalGrid {
  std::size_t d = 1;
  std::vector<double> points;  // row-major

  std::size_t size() const noexcept { return points.size() / d; }

  /// n equispaced points on [-1, 1].
  static EvalGrid equispaced(std::size_t n);
  /// n seeded uniform points in the d-dimensional unit ball.
  static EvalGrid monte_carlo(std::size_t d, std::size_t n, std::uint64_t seed);
  /// Equispaced in 1D, Monte Carlo otherwise.
  static EvalGrid standard(std::size_t d, std::size_t n, std::uint64_t seed);
};

/// Mean of (f(x) - prediction)^2 over the points.
double empirical_mse(std::span<const double> predictions, const TargetFunction& target,
                     std::span<const double> points);
double empirical_mse(const FittedModel& model, const TargetFunction& target, const EvalGrid& grid);
/// (1/N) sum_n (f(x_n) - fhat(x_n))^2 over the design points of `data`.
double empirical_mse(const FittedModel& model, const TargetFunction& target, const Dataset& data);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double halfwidth = 0.0;  // 1.96 standard errors
};

/// OLS of log(mse) on log(size). Needs at least three points, all positive.
SlopeFit loglog_slope(std::span<const double> sizes, std::span<const double> mses);

/// Log-spaced grid between lo and hi, optionally multiplied by N or sqrt(N).
struct LambdaGrid {
  enum class Scale { Absolute, TimesN, TimesSqrtN };
  double lo = 1e-5;
  double hi = 1e2;
  std::size_t count = 25;
  Scale scale = Scale::TimesN;
  /// Explicit values (used verbatim, unscaled) when nonempty.
  std::vector<double> values;

  std::vector<double> resolve(std::size_t n) const;
};

/// Default search grid per estimator: trend filter sqrt(N) x [1e-5, 1e1]
/// (31 points), cubic smoothing spline [1e-10, 1e2] (49), thin-plate spline
/// [1e-9, 1e-1] (17), ReLU network {0.01, 0.1, 1}.
LambdaGrid default_lambda_grid(EstimatorKind kind);

/// Network settings used for the 2D comparisons: width 128, weight decay with
/// lambda = 0.1, 5 restarts, 80000 iterations, step from suggested_step_size.
TrainConfig relu_2d_config(const Dataset& data);

struct LambdaRule {
  enum class Kind { Oracle, HoldOut, Fixed };
  Kind kind = Kind::Oracle;
  LambdaGrid grid;
  double holdout_fraction = 0.25;
  double value = 1.0;  // Fixed
};

struct LambdaScore {
  double lambda = 0.0;
  double score = 0.0;
};

struct Selection {
  double lambda = 0.0;
  std::vector<LambdaScore> scores;  // grid order
  FittedModel model;                // fit on the full data at the selected lambda
};

/// Oracle: population MSE on `grid` against `target`. HoldOut: squared error
/// on a seeded held-out fraction, then refit on all data. Fixed: pass-through.
/// Throws DomainError for Oracle without a target or grid.
Selection select_lambda(const EstimatorSpec& spec, const Dataset& data, const TargetFunction* target,
                        const LambdaRule& rule, const EvalGrid* grid, std::uint64_t seed);

struct ExperimentSpec {
  TargetFunction target = TargetFunction::inhomogeneous_1d();
  EstimatorSpec estimator;
  std::vector<std::size_t> sizes;
  double sigma = 0.25;
  std::size_t trials = 1;
  LambdaRule rule;
  std::size_t eval_points = 4096;
  Design design = Design::uniform_ball();
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct TrialRecord {
  std::size_t size = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double mse = 0.0;
  double seconds = 0.0;  // wall-clock fit time; not part of deterministic output
  bool ok = true;
  std::string error;
};

/// Per-size statistics and log-log slope. For approximation studies the
/// metric is the sup-norm error and sizes are widths.
struct RateResult {
  std::vector<std::size_t> sizes;
  std::vector<double> mse_mean;
  std::vector<double> mse_stderr;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_halfwidth = 0.0;
  std::vector<std::size_t> excluded_sizes;  // sizes left out of the slope fit
  std::vector<TrialRecord> per_trial;       // ordered by (size, trial)
};

/// Seed of trial `trial` at size index `size_index`.
std::uint64_t trial_seed(std::uint64_t study_seed, std::size_t size_index, std::size_t trial);

/// N-sweep: fresh dataset per (size, trial), lambda per rule, fit, grid MSE.
/// Deterministic given the ExperimentSpec, regardless of thread count. Throws if every
/// trial of some size fails.
RateResult rate_study(const ExperimentSpec& spec);

/// Recomputes per-size statistics and the slope from trial records.
void aggregate(RateResult& result);

struct ApproxOptions {
  std::size_t samples = 4096;
  std::size_t eval_resolution = 201;  // lattice per axis in 2D, points in 1D is 8 x this
  std::uint64_t seed = 0;
};

struct ApproxResult {
  RateResult rate;
  std::vector<NetworkParams> models;  // kept model per width
};

/// K-sweep at lambda = 0 on noiseless samples; each width is warm-started from
/// the previous kept model, and a new fit replaces it only if its sup error is
/// not worse, so the error sequence is non-increasing. base.step_size <= 0
/// means suggested_step_size of the sample set.
ApproxResult approximation_study(const TargetFunction& target, std::span<const std::size_t> widths,
                                 const TrainConfig& base, const ApproxOptions& options = {});

/// Points where sup errors are measured for a target of dimension d.
std::vector<double> sup_grid(std::size_t d, std::size_t resolution);

/// One neuron per knot (w = 1, b = knot, v = coefficient), c = beta1, c0 = beta0.
NetworkParams embed_as_network(const SplineModel& model);

struct LinearityReport {
  double additivity = 0.0;   // max |fit(y1 + y2) - fit(y1) - fit(y2)|
  double homogeneity = 0.0;  // max |fit(a y) - a fit(y)|
  double superposition = 0.0;  // max |fit(a y1 + b y2) - a fit(y1) - b fit(y2)|
};

/// Probe points for linearity checks: 100 equispaced points in 1D, 100 seeded
/// ball points otherwise.
std::vector<double> probe_grid(std::size_t d, std::size_t count = 100);

/// Compares fits of combined responses with combined fits on the probe grid
/// for one response pair.
LinearityReport linearity_check(const EstimatorSpec& spec, double lambda, const Dataset& design,
                                std::span<const double> y1, std::span<const double> y2, double alpha,
                                double beta);

/// Worst violations over `probes` seeded random response pairs.
LinearityReport linearity_probe(const EstimatorSpec& spec, double lambda, const Dataset& design,
                                std::size_t probes, std::uint64_t seed);

struct TrendWitness {
  std::vector<double> y1;
  std::vector<double> y2;
  double lambda = 0.0;
};

/// Response pair on a 1D design for which each response alone is fit by an
/// affine function (lambda above its threshold) but their sum is not.
TrendWitness trend_filter_witness(const Dataset& design);

}  // namespace adaptix
