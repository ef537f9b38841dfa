#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "adaptix/dataset.hpp"
#include "adaptix/relu_net.hpp"
#include "adaptix/rng.hpp"

using namespace adaptix;

namespace {

NetworkParams random_net(Rng& rng, std::size_t d, std::size_t k) {
  NetworkParams net = NetworkParams::affine(d);
  for (auto& c : net.c) c = rng.normal();
  net.c0 = rng.normal();
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> w(d);
    for (auto& x : w) x = rng.normal() * std::exp(rng.uniform(-1, 1));
    net.add_neuron(rng.normal() * std::exp(rng.uniform(-1, 1)), w, rng.uniform(-1, 1));
  }
  return net;
}

Dataset noise_data(Rng& rng, std::size_t d, std::size_t n) {
  std::vector<double> pts = uniform_ball_points(d, n, rng.next_u64());
  std::vector<double> y(n);
  for (auto& v : y) v = rng.normal();
  return make_dataset(d, pts, y);
}

double max_forward_gap(const NetworkParams& a, const NetworkParams& b, std::size_t d, std::uint64_t seed) {
  const auto pts = uniform_ball_points(d, 1000, seed);
  const auto fa = forward_batch(a, pts);
  const auto fb = forward_batch(b, pts);
  double gap = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) gap = std::max(gap, std::abs(fa[i] - fb[i]));
  return gap;
}

// flatten / unflatten for finite differences
std::vector<double> flat(const NetworkParams& p) {
  std::vector<double> out(p.v);
  out.insert(out.end(), p.w.begin(), p.w.end());
  out.insert(out.end(), p.b.begin(), p.b.end());
  out.insert(out.end(), p.c.begin(), p.c.end());
  out.push_back(p.c0);
  return out;
}

void set_flat(NetworkParams& p, const std::vector<double>& x) {
  std::size_t o = 0;
  for (auto& v : p.v) v = x[o++];
  for (auto& v : p.w) v = x[o++];
  for (auto& v : p.b) v = x[o++];
  for (auto& v : p.c) v = x[o++];
  p.c0 = x[o];
}

double min_kink_distance(const NetworkParams& p, const Dataset& data) {
  double m = INFINITY;
  for (std::size_t k = 0; k < p.width(); ++k)
    for (std::size_t n = 0; n < data.size(); ++n) {
      double z = -p.b[k];
      for (std::size_t j = 0; j < p.d; ++j) z += p.inner(k)[j] * data.point(n)[j];
      m = std::min(m, std::abs(z));
    }
  return m;
}

}  // namespace

TEST_CASE("forward and norm examples") {
  NetworkParams net = NetworkParams::affine(2);
  const double w[2] = {1.0, 0.0};
  net.add_neuron(1.0, w, 0.0);
  const double x1[2] = {0.5, 0.3}, x2[2] = {-0.5, 0.3};
  CHECK(forward(net, x1) == 0.5);
  CHECK(forward(net, x2) == 0.0);

  NetworkParams aff = NetworkParams::affine(2);
  aff.c = {2.0, -1.0};
  aff.c0 = 0.5;
  const double x3[2] = {0.1, 0.2};
  CHECK(forward(aff, x3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(path_norm(aff) == 0.0);

  NetworkParams one = NetworkParams::affine(2);
  const double u[2] = {0.6, 0.8};
  one.add_neuron(2.0, u, 0.0);
  CHECK(path_norm(one) == doctest::Approx(2.0));

  NetworkParams two = NetworkParams::affine(2);
  const double a[2] = {3.0, 0.0}, b[2] = {0.0, 0.5};
  two.add_neuron(1.0, a, 0.0);
  two.add_neuron(-2.0, b, 0.0);
  CHECK(path_norm(two) == doctest::Approx(4.0));
}

TEST_CASE("objective penalties") {
  // zero residuals: a single neuron that is dead on the data, y = 0
  Dataset data = make_dataset(1, {-0.5, -0.2}, {0.0, 0.0});
  NetworkParams net = NetworkParams::affine(1);
  const double w = 1.0;
  net.add_neuron(1.0, {&w, 1}, 0.5);
  CHECK(objective(net, data, 2.0, ObjectiveKind::WeightDecay) == doctest::Approx(2.0));
  CHECK(objective(net, data, 2.0, ObjectiveKind::PathNorm) == doctest::Approx(2.0));
  net.v[0] = 4.0;
  CHECK(objective(net, data, 1.0, ObjectiveKind::WeightDecay) == doctest::Approx(8.5));
  CHECK(objective(net, data, 1.0, ObjectiveKind::PathNorm) == doctest::Approx(4.0));
  CHECK(objective(NetworkParams::affine(1), data, 3.0, ObjectiveKind::WeightDecay) == 0.0);
}

TEST_CASE("gradient at an interpolating network with lambda 0 vanishes") {
  Rng rng(3);
  const auto net = random_net(rng, 2, 5);
  auto data = noise_data(rng, 2, 30);
  data.y = forward_batch(net, data.points);
  const auto g = gradient(net, data, 0.0, ObjectiveKind::WeightDecay);
  for (double x : flat(g)) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("weight-decay penalty gradient is lambda times the weights") {
  Rng rng(4);
  const auto net = random_net(rng, 3, 4);
  auto data = noise_data(rng, 3, 10);
  const auto g0 = gradient(net, data, 0.0, ObjectiveKind::WeightDecay);
  const auto g1 = gradient(net, data, 0.7, ObjectiveKind::WeightDecay);
  for (std::size_t k = 0; k < net.width(); ++k) {
    CHECK(g1.v[k] - g0.v[k] == doctest::Approx(0.7 * net.v[k]).epsilon(1e-12));
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(g1.w[k * 3 + j] - g0.w[k * 3 + j] == doctest::Approx(0.7 * net.w[k * 3 + j]).epsilon(1e-12));
    CHECK(g1.b[k] == g0.b[k]);
  }
}

TEST_CASE("gradient matches central differences away from kinks") {
  Rng rng(17);
  int tested = 0;
  double worst = 0.0;
  while (tested < 40) {
    const std::size_t d = 1 + rng.next_u64() % 3;
    auto net = random_net(rng, d, 1 + rng.next_u64() % 6);
    const auto data = noise_data(rng, d, 12);
    if (min_kink_distance(net, data) < 1e-3) continue;
    ++tested;
    for (auto kind : {ObjectiveKind::WeightDecay, ObjectiveKind::PathNorm}) {
      const double lambda = 0.3;
      const auto g = flat(gradient(net, data, lambda, kind));
      auto x = flat(net);
      const double h = 1e-6;
      for (std::size_t i = 0; i < x.size(); ++i) {
        NetworkParams p = net;
        const double x0 = x[i];
        x[i] = x0 + h;
        set_flat(p, x);
        const double fp = objective(p, data, lambda, kind);
        x[i] = x0 - h;
        set_flat(p, x);
        const double fm = objective(p, data, lambda, kind);
        x[i] = x0;
        const double fd = (fp - fm) / (2 * h);
        worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("balance") {
  SUBCASE("example neuron") {
    NetworkParams net = NetworkParams::affine(2);
    const double w[2] = {1.0, 0.0};
    net.add_neuron(4.0, w, 0.5);
    const auto bal = balance(net);
    REQUIRE(bal.width() == 1);
    CHECK(bal.v[0] == doctest::Approx(2.0));
    CHECK(bal.w[0] == doctest::Approx(2.0));
    CHECK(bal.w[1] == 0.0);
    CHECK(bal.b[0] == doctest::Approx(1.0));
    CHECK(max_forward_gap(net, bal, 2, 1) < 1e-12);
    const auto again = balance(bal);
    CHECK(std::abs(again.v[0] - bal.v[0]) < 1e-12);
    CHECK(std::abs(again.w[0] - bal.w[0]) < 1e-12);
  }
  SUBCASE("AM-GM properties on random networks") {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
      const std::size_t d = 1 + t % 4;
      const auto net = random_net(rng, d, 1 + t % 9);
      const auto data = noise_data(rng, d, 8);
      const double lam = 0.5;
      const double wd = lam * weight_decay_norm(net);
      const double pn = lam * path_norm(net);
      CHECK(wd >= pn - 1e-12);
      const auto bal = balance(net);
      CHECK(lam * weight_decay_norm(bal) == doctest::Approx(pn).epsilon(1e-12));
      CHECK(objective(bal, data, lam, ObjectiveKind::WeightDecay) <=
            objective(net, data, lam, ObjectiveKind::WeightDecay) + 1e-10);
      CHECK(objective(bal, data, lam, ObjectiveKind::PathNorm) ==
            doctest::Approx(objective(net, data, lam, ObjectiveKind::PathNorm)).epsilon(1e-12));
      CHECK(max_forward_gap(net, bal, d, t) < 1e-12);
    }
  }
}

TEST_CASE("positive homogeneity of a neuron") {
  Rng rng(2);
  auto net = random_net(rng, 2, 3);
  auto scaled = net;
  const double alpha = 3.7;
  scaled.v[1] /= alpha;
  for (std::size_t j = 0; j < 2; ++j) scaled.w[2 + j] *= alpha;
  scaled.b[1] *= alpha;
  CHECK(max_forward_gap(net, scaled, 2, 5) < 1e-12);
  CHECK(path_norm(scaled) == doctest::Approx(path_norm(net)).epsilon(1e-13));
}

TEST_CASE("reduce") {
  const double u[2] = {0.6, 0.8};
  SUBCASE("cancelling pair") {
    NetworkParams net = NetworkParams::affine(2);
    net.add_neuron(1.0, u, 0.2);
    net.add_neuron(-1.0, u, 0.2);
    const auto red = reduce(net);
    CHECK(red.width() == 0);
    CHECK(max_forward_gap(net, red, 2, 1) < 1e-12);
  }
  SUBCASE("rescaled to unit inner weight") {
    NetworkParams net = NetworkParams::affine(2);
    const double w[2] = {1.2, 1.6};
    net.add_neuron(1.0, w, 0.4);
    const auto red = reduce(net);
    REQUIRE(red.width() == 1);
    CHECK(red.v[0] == doctest::Approx(2.0));
    CHECK(red.w[0] == doctest::Approx(0.6));
    CHECK(red.w[1] == doctest::Approx(0.8));
    CHECK(red.b[0] == doctest::Approx(0.2));
  }
  SUBCASE("always-active neuron folds into the affine part") {
    NetworkParams net = NetworkParams::affine(2);
    net.add_neuron(1.5, u, -3.0);
    const auto red = reduce(net);
    CHECK(red.width() == 0);
    CHECK(red.c[0] == doctest::Approx(1.5 * 0.6));
    CHECK(red.c[1] == doctest::Approx(1.5 * 0.8));
    CHECK(red.c0 == doctest::Approx(4.5));
  }
  SUBCASE("random networks") {
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
      const std::size_t d = 1 + t % 3;
      auto net = random_net(rng, d, 12);
      // add duplicates and antipodes
      const auto w0 = std::vector<double>(net.inner(0).begin(), net.inner(0).end());
      std::vector<double> neg(w0);
      for (auto& x : neg) x = -x;
      net.add_neuron(0.5, w0, net.b[0]);
      net.add_neuron(0.3, neg, -net.b[0]);
      const auto red = reduce(net);
      CHECK(max_forward_gap(net, red, d, t) < 1e-9);
      CHECK(path_norm(red) <= path_norm(net) + 1e-12);
      for (std::size_t k = 0; k < red.width(); ++k) CHECK(std::abs(red.b[k]) < 1.0);
    }
  }
}

TEST_CASE("train") {
  SUBCASE("recovers a one-neuron generator") {
    NetworkParams gen = NetworkParams::affine(2);
    const double w[2] = {0.8, -0.6};
    gen.add_neuron(1.3, w, 0.1);
    std::vector<double> losses;
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto data = make_dataset(2, uniform_ball_points(2, 100, s + 100), std::vector<double>(100));
      data.y = forward_batch(gen, data.points);
      TrainConfig cfg;
      cfg.width = 4;
      cfg.lambda = 1e-6;
      cfg.max_iters = 20000;
      cfg.step_size = suggested_step_size(data);
      cfg.seed = s;
      const auto res = train(data, cfg);
      losses.push_back(data_loss(res.params, data));
    }
    std::sort(losses.begin(), losses.end());
    CHECK(losses[2] < 1e-6);
  }
  SUBCASE("huge lambda collapses to least squares") {
    Rng rng(6);
    auto data = noise_data(rng, 2, 40);
    double bound = 0.0;
    for (double v : data.y) bound += std::abs(v);
    TrainConfig cfg;
    cfg.width = 6;
    cfg.lambda = 2.0 * bound;
    cfg.step_size = suggested_step_size(data);
    cfg.max_iters = 5000;
    const auto res = train(data, cfg);
    const auto red = reduce(res.params, 1e-6);
    CHECK(red.width() == 0);
    // least-squares oracle via the 3x3 normal equations
    double A[3][3] = {}, r[3] = {};
    for (std::size_t n = 0; n < data.size(); ++n) {
      const double phi[3] = {1.0, data.point(n)[0], data.point(n)[1]};
      for (int i = 0; i < 3; ++i) {
        r[i] += phi[i] * data.y[n];
        for (int j = 0; j < 3; ++j) A[i][j] += phi[i] * phi[j];
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int k = i + 1; k < 3; ++k) {
        const double f = A[k][i] / A[i][i];
        for (int j = 0; j < 3; ++j) A[k][j] -= f * A[i][j];
        r[k] -= f * r[i];
      }
    double beta[3];
    for (int i = 2; i >= 0; --i) {
      double s = r[i];
      for (int j = i + 1; j < 3; ++j) s -= A[i][j] * beta[j];
      beta[i] = s / A[i][i];
    }
    CHECK(red.c0 == doctest::Approx(beta[0]).epsilon(1e-4));
    CHECK(red.c[0] == doctest::Approx(beta[1]).epsilon(1e-4));
    CHECK(red.c[1] == doctest::Approx(beta[2]).epsilon(1e-4));
  }
  SUBCASE("warm start never loses") {
    Rng rng(7);
    auto data = noise_data(rng, 1, 30);
    TrainConfig cfg;
    cfg.width = 5;
    cfg.lambda = 0.05;
    cfg.step_size = suggested_step_size(data);
    cfg.max_iters = 3000;
    const auto first = train(data, cfg);
    const double warm_obj = objective(first.params, data, cfg.lambda, cfg.objective_kind);
    cfg.width = 13;
    cfg.warm_start = first.params;
    cfg.seed = 99;
    const auto second = train(data, cfg);
    CHECK(second.report.final_objective <= warm_obj + 1e-9);
  }
  SUBCASE("bit-deterministic") {
    Rng rng(8);
    auto data = noise_data(rng, 2, 25);
    TrainConfig cfg;
    cfg.width = 7;
    cfg.lambda = 0.1;
    cfg.restarts = 2;
    cfg.step_size = suggested_step_size(data);
    cfg.max_iters = 1500;
    const auto a = train(data, cfg);
    const auto b = train(data, cfg);
    CHECK(flat(a.params) == flat(b.params));
    CHECK(a.report.restart_objectives == b.report.restart_objectives);
  }
}
