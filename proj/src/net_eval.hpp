#pragma once

// Batched objective/gradient evaluation over a fixed dataset; shared by the
// public objective()/gradient() entry points and the trainer.

#include <vector>

#include "adaptix/relu_net.hpp"

namespace adaptix::detail {

class BatchEvaluator {
 public:
  explicit BatchEvaluator(const Dataset& data);

  std::size_t size() const noexcept { return y_.size(); }
  std::size_t dim() const noexcept { return d_; }

  /// Fills fitted values at the design points.
  void fitted(const NetworkParams& net, std::vector<double>& out) const;

  /// Objective value; when grad != nullptr also writes the gradient.
  double evaluate(const NetworkParams& net, double lambda, ObjectiveKind kind,
                  NetworkParams* grad);

 private:
  std::size_t d_;
  std::vector<double> cols_;
  std::vector<double> y_;
  std::vector<double> residual_;
  std::vector<double> x_sums_;
};

/// Penalty term without lambda.
double penalty(const NetworkParams& net, ObjectiveKind kind);

}  // namespace adaptix::detail
