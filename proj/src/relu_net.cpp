#include "adaptix/relu_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaptix/error.hpp"
#include "adaptix/kernels.hpp"
#include "net_eval.hpp"

namespace adaptix {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

void check_data(const NetworkParams& net, const Dataset& data) {
  net.validate();
  if (data.d != net.d)
    throw DimensionError("network of dimension " + std::to_string(net.d) + " applied to data of dimension " +
                         std::to_string(data.d));
  if (data.points.size() != data.size() * data.d) throw DimensionError("malformed dataset");
}

}  // namespace

NetworkParams NetworkParams::affine(std::size_t d) {
  NetworkParams net;
  net.d = d;
  net.c.assign(d, 0.0);
  return net;
}

void NetworkParams::add_neuron(double vk, std::span<const double> wk, double bk) {
  if (wk.size() != d) throw DimensionError("add_neuron: inner weight has wrong dimension");
  v.push_back(vk);
  w.insert(w.end(), wk.begin(), wk.end());
  b.push_back(bk);
}

void NetworkParams::validate() const {
  const std::size_t K = v.size();
  if (d == 0) throw DimensionError("network dimension must be positive");
  if (w.size() != K * d || b.size() != K || c.size() != d)
    throw DimensionError("inconsistent network parameter sizes");
}

double forward(const NetworkParams& net, std::span<const double> x) {
  if (x.size() != net.d)
    throw DimensionError("forward: expected a point of dimension " + std::to_string(net.d) + ", got " +
                         std::to_string(x.size()));
  net.validate();
  double f = net.c0;
  for (std::size_t j = 0; j < net.d; ++j) f += net.c[j] * x[j];
  for (std::size_t k = 0; k < net.width(); ++k) {
    const auto wk = net.inner(k);
    double z = -net.b[k];
    for (std::size_t j = 0; j < net.d; ++j) z += wk[j] * x[j];
    f += net.v[k] * relu(z);
  }
  return f;
}

std::vector<double> forward_batch(const NetworkParams& net, std::span<const double> points) {
  net.validate();
  if (points.size() % net.d != 0) throw DimensionError("forward_batch: point matrix size mismatch");
  const std::size_t n = points.size() / net.d;
  Dataset tmp;
  tmp.d = net.d;
  tmp.points.assign(points.begin(), points.end());
  tmp.y.assign(n, 0.0);
  std::vector<double> out;
  detail::BatchEvaluator(tmp).fitted(net, out);
  return out;
}

double path_norm(const NetworkParams& net) {
  double s = 0.0;
  for (std::size_t k = 0; k < net.width(); ++k) s += std::abs(net.v[k]) * norm2(net.inner(k));
  return s;
}

double weight_decay_norm(const NetworkParams& net) {
  double s = 0.0;
  for (double x : net.v) s += x * x;
  for (double x : net.w) s += x * x;
  return 0.5 * s;
}

double detail::penalty(const NetworkParams& net, ObjectiveKind kind) {
  return kind == ObjectiveKind::WeightDecay ? weight_decay_norm(net) : path_norm(net);
}

double data_loss(const NetworkParams& net, const Dataset& data) {
  check_data(net, data);
  return detail::BatchEvaluator(data).evaluate(net, 0.0, ObjectiveKind::PathNorm, nullptr);
}

double objective(const NetworkParams& net, const Dataset& data, double lambda, ObjectiveKind kind) {
  check_data(net, data);
  return detail::BatchEvaluator(data).evaluate(net, lambda, kind, nullptr);
}

NetworkParams gradient(const NetworkParams& net, const Dataset& data, double lambda,
                       ObjectiveKind kind) {
  check_data(net, data);
  NetworkParams g;
  detail::BatchEvaluator(data).evaluate(net, lambda, kind, &g);
  return g;
}

// ---------------------------------------------------------------------------

detail::BatchEvaluator::BatchEvaluator(const Dataset& data)
    : d_(data.d), cols_(data.columns()), y_(data.y), residual_(data.size()), x_sums_(data.d) {}

void detail::BatchEvaluator::fitted(const NetworkParams& net, std::vector<double>& out) const {
  const std::size_t n = size();
  const auto& kt = kernels::active();
  out.assign(n, net.c0);
  for (std::size_t j = 0; j < d_; ++j) {
    const double cj = net.c[j];
    const double* col = cols_.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) out[i] += cj * col[i];
  }
  for (std::size_t k = 0; k < net.width(); ++k)
    kt.relu_accumulate(cols_.data(), n, d_, net.w.data() + k * d_, net.b[k], net.v[k], out.data());
}

double detail::BatchEvaluator::evaluate(const NetworkParams& net, double lambda, ObjectiveKind kind,
                                        NetworkParams* grad) {
  const std::size_t n = size();
  const std::size_t K = net.width();
  const auto& kt = kernels::active();
  fitted(net, residual_);
  for (std::size_t i = 0; i < n; ++i) residual_[i] -= y_[i];
  const double loss = kt.dot(residual_.data(), residual_.data(), n);
  const double value = lambda > 0.0 ? loss + lambda * penalty(net, kind) : loss;
  if (grad == nullptr) return value;

  NetworkParams& g = *grad;
  g.d = d_;
  g.reduced = false;
  g.v.assign(K, 0.0);
  g.w.assign(K * d_, 0.0);
  g.b.assign(K, 0.0);
  g.c.assign(d_, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double* wk = net.w.data() + k * d_;
    const auto s = kt.relu_correlate(cols_.data(), n, d_, wk, net.b[k], residual_.data(), x_sums_.data());
    const double vk = net.v[k];
    g.v[k] = 2.0 * s.act;
    for (std::size_t j = 0; j < d_; ++j) g.w[k * d_ + j] = 2.0 * vk * x_sums_[j];
    g.b[k] = -2.0 * vk * s.mask;
    if (lambda > 0.0) {
      if (kind == ObjectiveKind::WeightDecay) {
        g.v[k] += lambda * vk;
        for (std::size_t j = 0; j < d_; ++j) g.w[k * d_ + j] += lambda * wk[j];
      } else {
        const double nw = norm2({wk, d_});
        const double av = std::abs(vk);
        if (vk != 0.0) g.v[k] += lambda * (vk > 0.0 ? nw : -nw);
        if (nw > 0.0)
          for (std::size_t j = 0; j < d_; ++j) g.w[k * d_ + j] += lambda * av * wk[j] / nw;
      }
    }
  }
  for (std::size_t j = 0; j < d_; ++j) g.c[j] = 2.0 * kt.dot(residual_.data(), cols_.data() + j * n, n);
  double rs = 0.0;
  for (double r : residual_) rs += r;
  g.c0 = 2.0 * rs;
  return value;
}

// ---------------------------------------------------------------------------

NetworkParams balance(const NetworkParams& net) {
  net.validate();
  NetworkParams out = NetworkParams::affine(net.d);
  out.c = net.c;
  out.c0 = net.c0;
  std::vector<double> wk(net.d);
  for (std::size_t k = 0; k < net.width(); ++k) {
    const auto src = net.inner(k);
    const double nw = norm2(src);
    const double vk = net.v[k];
    if (nw == 0.0) {
      out.c0 += vk * relu(-net.b[k]);
      continue;
    }
    if (vk == 0.0) continue;
    const double alpha = std::sqrt(std::abs(vk) / nw);
    for (std::size_t j = 0; j < net.d; ++j) wk[j] = alpha * src[j];
    out.add_neuron(vk / alpha, wk, alpha * net.b[k]);
  }
  return out;
}

NetworkParams reduce(const NetworkParams& net, double merge_tol) {
  net.validate();
  if (!(merge_tol > 0.0)) throw DomainError("reduce: merge_tol must be positive");
  const std::size_t d = net.d;
  NetworkParams out = NetworkParams::affine(d);
  out.c = net.c;
  out.c0 = net.c0;

  std::vector<double> wk(d);
  auto distance = [&](std::size_t kept, std::span<const double> wn, double bn, double sign) {
    const auto wj = out.inner(kept);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = wj[j] - sign * wn[j];
      s += t * t;
    }
    const double tb = out.b[kept] - sign * bn;
    return std::sqrt(s + tb * tb);
  };

  for (std::size_t k = 0; k < net.width(); ++k) {
    const auto src = net.inner(k);
    const double nw = norm2(src);
    if (nw == 0.0) {
      out.c0 += net.v[k] * relu(-net.b[k]);
      continue;
    }
    const double vk = net.v[k] * nw;
    const double bk = net.b[k] / nw;
    for (std::size_t j = 0; j < d; ++j) wk[j] = src[j] / nw;
    if (std::abs(vk) < merge_tol) continue;
    if (bk >= 1.0) continue;  // never active on the ball
    if (bk <= -1.0) {         // active on the whole ball: affine there
      for (std::size_t j = 0; j < d; ++j) out.c[j] += vk * wk[j];
      out.c0 -= vk * bk;
      continue;
    }
    bool merged = false;
    for (std::size_t m = 0; m < out.width() && !merged; ++m) {
      if (distance(m, wk, bk, 1.0) <= merge_tol) {
        out.v[m] += vk;
        merged = true;
      } else if (distance(m, wk, bk, -1.0) <= merge_tol) {
        // v relu(-z) = v relu(z) - v z, with z the kept neuron's preactivation
        const auto wm = out.inner(m);
        out.v[m] += vk;
        for (std::size_t j = 0; j < d; ++j) out.c[j] -= vk * wm[j];
        out.c0 += vk * out.b[m];
        merged = true;
      }
    }
    if (!merged) out.add_neuron(vk, wk, bk);
  }

  NetworkParams pruned = NetworkParams::affine(d);
  pruned.c = out.c;
  pruned.c0 = out.c0;
  for (std::size_t k = 0; k < out.width(); ++k)
    if (std::abs(out.v[k]) >= merge_tol) pruned.add_neuron(out.v[k], out.inner(k), out.b[k]);
  pruned.reduced = true;
  return pruned;
}

}  // namespace adaptix
