#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adaptix/dataset.hpp"

namespace adaptix {

/// Shallow ReLU network with a skip connection:
///   f(x) = sum_k v_k relu(w_k . x - b_k) + c . x + c0
struct NetworkParams {
  std::size_t d = 1;
  std::vector<double> v;  ///< outer weights, K
  std::vector<double> w;  ///< inner weights, K x d row-major
  std::vector<double> b;  ///< biases, K
  std::vector<double> c;  ///< skip-connection slope, d
  double c0 = 0.0;        ///< skip-connection intercept
  bool reduced = false;

  /// Affine-only network of dimension d.
  static NetworkParams affine(std::size_t d);

  std::size_t width() const noexcept { return v.size(); }
  std::span<const double> inner(std::size_t k) const { return {w.data() + k * d, d}; }
  std::span<double> inner(std::size_t k) { return {w.data() + k * d, d}; }

  void add_neuron(double vk, std::span<const double> wk, double bk);

  /// Throws DimensionError if the field sizes disagree.
  void validate() const;
};

enum class ObjectiveKind { WeightDecay, PathNorm };

double forward(const NetworkParams& net, std::span<const double> x);

/// Forward pass at every row of a row-major point matrix.
std::vector<double> forward_batch(const NetworkParams& net, std::span<const double> points);

/// sum_k |v_k| ||w_k||_2
double path_norm(const NetworkParams& net);

/// (1/2) sum_k (v_k^2 + ||w_k||^2)
double weight_decay_norm(const NetworkParams& net);

/// sum_n (y_n - f(x_n))^2
double data_loss(const NetworkParams& net, const Dataset& data);

/// Data loss plus lambda * (weight-decay norm | path norm). Biases and the
/// skip connection are never penalized.
double objective(const NetworkParams& net, const Dataset& data, double lambda, ObjectiveKind kind);

/// Exact (sub)gradient of objective() with relu'(0) = 0 and zero subgradients
/// of |.| and ||.|| at the origin. Returned in NetworkParams layout.
NetworkParams gradient(const NetworkParams& net, const Dataset& data, double lambda,
                       ObjectiveKind kind);

/// Rescales every neuron so that |v_k| = ||w_k||. Neurons with w_k = 0 are
/// deleted (their constant output folded into c0), as are neurons with v_k = 0.
NetworkParams balance(const NetworkParams& net);

/// Canonical reduced form on the unit ball: unit-norm inner weights, biases in
/// (-1, 1), duplicate and antipodal (w, b) pairs merged, dead or everywhere-
/// active neurons folded into the affine part, |v_k| < merge_tol dropped.
NetworkParams reduce(const NetworkParams& net, double merge_tol = 1e-8);

struct TrainConfig {
  std::size_t width = 1;
  double lambda = 0.0;
  ObjectiveKind objective_kind = ObjectiveKind::WeightDecay;
  std::size_t max_iters = 20000;
  double step_size = 1e-3;
  double momentum = 0.9;
  double grad_tol = 1e-8;
  std::size_t restarts = 1;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  std::optional<NetworkParams> warm_start;

  void validate() const;
};

struct TrainReport {
  /// Objective of the returned network after balancing (for WeightDecay this
  /// is the smallest value over the network's rescaling orbit).
  double final_objective = 0.0;
  std::size_t iterations = 0;   ///< iterations of the selected restart
  double grad_norm = 0.0;       ///< gradient norm at the end of the selected restart
  std::size_t best_restart = 0;
  std::vector<double> restart_objectives;
  bool warm_start_kept = false;  ///< the padded warm start beat every restart
};

struct TrainResult {
  NetworkParams params;
  TrainReport report;
};

/// Full-batch gradient descent with heavy-ball momentum and step backtracking,
/// over config.restarts random initializations. Deterministic given
/// (data, config). Throws NumericalError on a non-finite objective.
TrainResult train(const Dataset& data, const TrainConfig& config);

/// Step size scaled to the data: 1 / (2 N (1 + mean ||x||^2)).
double suggested_step_size(const Dataset& data);

}  // namespace adaptix
