#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "adaptix/error.hpp"
#include "adaptix/relu_net.hpp"
#include "adaptix/rng.hpp"
#include "net_eval.hpp"

namespace adaptix {

namespace {

constexpr double kBacktrack = 0.5;
constexpr double kGrowth = 1.25;
constexpr double kStallRatio = 1e-10;

/// Applies f(param, grad) over every trainable scalar of two same-shaped networks.
template <typename F>
void zip_params(NetworkParams& a, const NetworkParams& b, F&& f) {
  for (std::size_t i = 0; i < a.v.size(); ++i) f(a.v[i], b.v[i]);
  for (std::size_t i = 0; i < a.w.size(); ++i) f(a.w[i], b.w[i]);
  for (std::size_t i = 0; i < a.b.size(); ++i) f(a.b[i], b.b[i]);
  for (std::size_t i = 0; i < a.c.size(); ++i) f(a.c[i], b.c[i]);
  f(a.c0, b.c0);
}

double squared_norm(const NetworkParams& g) {
  double s = g.c0 * g.c0;
  for (double x : g.v) s += x * x;
  for (double x : g.w) s += x * x;
  for (double x : g.b) s += x * x;
  for (double x : g.c) s += x * x;
  return s;
}

NetworkParams zeros_like(const NetworkParams& p) {
  NetworkParams z = p;
  std::fill(z.v.begin(), z.v.end(), 0.0);
  std::fill(z.w.begin(), z.w.end(), 0.0);
  std::fill(z.b.begin(), z.b.end(), 0.0);
  std::fill(z.c.begin(), z.c.end(), 0.0);
  z.c0 = 0.0;
  return z;
}

/// Sets (c, c0) to the least-squares fit of the data minus the neuron outputs.
void fit_affine_part(NetworkParams& net, const Dataset& data, const detail::BatchEvaluator& ev) {
  const std::size_t n = data.size();
  const std::size_t d = data.d;
  NetworkParams neurons_only = net;
  std::fill(neurons_only.c.begin(), neurons_only.c.end(), 0.0);
  neurons_only.c0 = 0.0;
  std::vector<double> f;
  ev.fitted(neurons_only, f);
  Eigen::MatrixXd A(n, d + 1);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    for (std::size_t j = 0; j < d; ++j) A(i, j + 1) = data.points[i * d + j];
    rhs(i) = data.y[i] - f[i];
  }
  const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(rhs);
  net.c0 = sol(0);
  for (std::size_t j = 0; j < d; ++j) net.c[j] = sol(j + 1);
}

void add_random_neurons(NetworkParams& net, std::size_t count, double scale, bool zero_output, Rng& rng) {
  for (std::size_t k = 0; k < count; ++k) {
    auto u = rng.unit_vector(net.d);
    for (double& x : u) x *= scale;
    const double b = scale * rng.uniform(-1.0, 1.0);
    const double v = zero_output ? 0.0 : scale * rng.normal();
    net.add_neuron(v, u, b);
  }
}

struct DescentOutcome {
  NetworkParams params;
  double objective;
  double grad_norm;
  std::size_t iterations;
};

DescentOutcome descend(detail::BatchEvaluator& ev, NetworkParams theta, const TrainConfig& cfg) {
  NetworkParams grad;
  NetworkParams trial_grad;
  double value = ev.evaluate(theta, cfg.lambda, cfg.objective_kind, &grad);
  if (!std::isfinite(value)) throw NumericalError("train: non-finite objective", 0);
  NetworkParams velocity = zeros_like(theta);
  NetworkParams trial = theta;
  double step = cfg.step_size;
  double gnorm = std::sqrt(squared_norm(grad));
  DescentOutcome best{theta, value, gnorm, 0};
  std::size_t it = 0;
  while (it < cfg.max_iters && gnorm > cfg.grad_tol) {
    ++it;
    // Backtracking collapsed: the iterate sits on a ReLU kink where -grad is
    // not a descent direction. Take one plain full step off the kink.
    const bool kick = step < kStallRatio * cfg.step_size;
    if (kick) {
      velocity = zeros_like(theta);
      step = cfg.step_size;
    }
    // velocity <- momentum * velocity - step * grad; trial = theta + velocity
    NetworkParams next_velocity = velocity;
    zip_params(next_velocity, grad, [&](double& vel, double g) { vel = cfg.momentum * vel - step * g; });
    trial = theta;
    zip_params(trial, next_velocity, [](double& p, double dv) { p += dv; });
    const double trial_value = ev.evaluate(trial, cfg.lambda, cfg.objective_kind, &trial_grad);
    if (!std::isfinite(trial_value)) throw NumericalError("train: non-finite objective", it);
    if (kick || trial_value <= value) {
      std::swap(theta, trial);
      std::swap(grad, trial_grad);
      velocity = kick ? zeros_like(theta) : std::move(next_velocity);
      value = trial_value;
      gnorm = std::sqrt(squared_norm(grad));
      if (!kick) step = std::min(step * kGrowth, cfg.step_size);
      if (value < best.objective) best = {theta, value, gnorm, it};
    } else {
      velocity = zeros_like(theta);
      step *= kBacktrack;
    }
  }
  best.iterations = it;
  return best;
}

}  // namespace

void TrainConfig::validate() const {
  if (width < 1) throw DomainError("TrainConfig: width must be >= 1");
  if (!(lambda >= 0.0)) throw DomainError("TrainConfig: lambda must be nonnegative");
  if (max_iters < 1) throw DomainError("TrainConfig: max_iters must be >= 1");
  if (!(step_size > 0.0)) throw DomainError("TrainConfig: step_size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("TrainConfig: momentum must lie in [0, 1)");
  if (!(grad_tol > 0.0)) throw DomainError("TrainConfig: grad_tol must be positive");
  if (restarts < 1) throw DomainError("TrainConfig: restarts must be >= 1");
  if (!(init_scale > 0.0)) throw DomainError("TrainConfig: init_scale must be positive");
}

double suggested_step_size(const Dataset& data) {
  double s = 0.0;
  for (double x : data.points) s += x * x;
  const double n = static_cast<double>(std::max<std::size_t>(data.size(), 1));
  return 1.0 / (2.0 * n * (1.0 + s / n));
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
  config.validate();
  data.validate();
  if (config.warm_start) {
    config.warm_start->validate();
    if (config.warm_start->d != data.d) throw DimensionError("train: warm start has the wrong dimension");
  }
  detail::BatchEvaluator ev(data);

  auto finalize = [&](const NetworkParams& p) {
    NetworkParams reduced = reduce(balance(p));
    const double value = ev.evaluate(balance(reduced), config.lambda, config.objective_kind, nullptr);
    return std::pair{std::move(reduced), value};
  };

  TrainResult result;
  bool have_best = false;
  if (config.warm_start) {
    auto [net, value] = finalize(*config.warm_start);
    result.params = std::move(net);
    result.report.final_objective = value;
    result.report.warm_start_kept = true;
    have_best = true;
  }

  for (std::size_t r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(config.seed, r));
    NetworkParams init = NetworkParams::affine(data.d);
    if (r == 0 && config.warm_start) {
      init = *config.warm_start;
      init.reduced = false;
      if (init.width() < config.width)
        add_random_neurons(init, config.width - init.width(), config.init_scale, true, rng);
    } else {
      add_random_neurons(init, config.width, config.init_scale, false, rng);
      fit_affine_part(init, data, ev);
    }
    DescentOutcome out = descend(ev, std::move(init), config);
    auto [net, value] = finalize(out.params);
    result.report.restart_objectives.push_back(value);
    if (!have_best || value < result.report.final_objective) {
      result.params = std::move(net);
      result.report.final_objective = value;
      result.report.iterations = out.iterations;
      result.report.grad_norm = out.grad_norm;
      result.report.best_restart = r;
      result.report.warm_start_kept = false;
      have_best = true;
    }
  }
  return result;
}

}  // namespace adaptix
