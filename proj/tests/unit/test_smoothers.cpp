#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "adaptix/dataset.hpp"
#include "adaptix/error.hpp"
#include "adaptix/rng.hpp"
#include "adaptix/smoothers.hpp"
#include "adaptix/targets.hpp"

using namespace adaptix;

namespace {

Dataset noisy_1d(std::size_t n, std::uint64_t seed) {
  return make_dataset(TargetFunction::inhomogeneous_1d(), n, 0.25, seed, Design::fixed());
}

Dataset random_1d(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = rng.uniform(-1, 1);
  std::sort(x.begin(), x.end());
  for (auto& v : y) v = rng.normal();
  return make_dataset(1, x, y);
}

// dense (I + lambda Q R^-1 Q^T) g = y in long double; the dense form is badly
// conditioned for close design points
std::vector<double> css_oracle(const Dataset& data, double lambda) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(data.size());
  std::vector<long double> h(n - 1);
  for (int i = 0; i + 1 < n; ++i) h[i] = static_cast<long double>(data.points[i + 1]) - data.points[i];
  Mat Q = Mat::Zero(n, n - 2), R = Mat::Zero(n - 2, n - 2);
  for (int j = 1; j + 1 < n; ++j) {
    Q(j - 1, j - 1) = 1.0L / h[j - 1];
    Q(j, j - 1) = -1.0L / h[j - 1] - 1.0L / h[j];
    Q(j + 1, j - 1) = 1.0L / h[j];
    R(j - 1, j - 1) = (h[j - 1] + h[j]) / 3.0L;
    if (j + 1 < n - 1) R(j - 1, j) = R(j, j - 1) = h[j] / 6.0L;
  }
  const Mat K = Q * R.fullPivLu().solve(Mat(Q.transpose()));
  const Mat A = Mat::Identity(n, n) + static_cast<long double>(lambda) * K;
  Vec y(n);
  for (int i = 0; i < n; ++i) y(i) = data.y[i];
  const Vec g = A.fullPivLu().solve(y);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = static_cast<double>(g(i));
  return out;
}

std::vector<double> affine_ls_fit(const Dataset& data) {
  const double n = static_cast<double>(data.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sx += data.points[i];
    sy += data.y[i];
    sxx += data.points[i] * data.points[i];
    sxy += data.points[i] * data.y[i];
  }
  const double b1 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double b0 = (sy - b1 * sx) / n;
  std::vector<double> f(data.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = b0 + b1 * data.points[i];
  return f;
}

Dataset disk_data(std::size_t n, std::uint64_t seed, bool planar) {
  const auto pts = uniform_ball_points(2, n, seed);
  Rng rng(seed + 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = planar ? 0.3 - 1.2 * pts[2 * i] + 0.7 * pts[2 * i + 1] : std::sin(3 * pts[2 * i]) + rng.normal() * 0.1;
  return make_dataset(2, pts, y);
}

}  // namespace

TEST_CASE("css agrees with the dense Reinsch system") {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto data = s % 2 ? noisy_1d(40, s) : random_1d(25, s);
    for (double lam : {1e-6, 1e-3, 0.1, 10.0}) {
      const auto m = fit_css(data, lam);
      const auto g = css_oracle(data, lam);
      for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(m.fitted[i] - g[i]) < 1e-8);
    }
  }
}

TEST_CASE("css examples") {
  const auto data = random_1d(20, 3);
  SUBCASE("lambda 0 interpolates") {
    const auto m = fit_css(data, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(m.fitted[i] - data.y[i]) < 1e-10);
  }
  SUBCASE("affine data is reproduced") {
    auto aff = data;
    for (std::size_t i = 0; i < aff.size(); ++i) aff.y[i] = 0.4 * aff.points[i] - 0.25;
    for (double lam : {0.0, 1e-3, 1.0, 1e6}) {
      const auto m = fit_css(aff, lam);
      for (std::size_t i = 0; i < aff.size(); ++i) CHECK(std::abs(m.fitted[i] - aff.y[i]) < 1e-8);
      const double mid = 0.5 * (aff.points[3] + aff.points[4]);
      CHECK(std::abs(eval_css(m, mid) - (0.4 * mid - 0.25)) < 1e-8);
    }
  }
  SUBCASE("huge lambda gives least squares") {
    const auto m = fit_css(data, 1e12);
    const auto ls = affine_ls_fit(data);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(m.fitted[i] - ls[i]) < 1e-6);
  }
  SUBCASE("evaluation at knots is exact") {
    const auto m = fit_css(data, 0.01);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(eval_css(m, m.knots[i]) == m.fitted[i]);
  }
  SUBCASE("second derivatives match difference quotients") {
    const auto m = fit_css(data, 0.01);
    for (std::size_t i = 2; i + 2 < data.size(); i += 3) {
      const double t = m.knots[i];
      double prev_err = INFINITY;
      for (double h : {1e-3, 1e-4}) {
        const double q = (eval_css(m, t + h) - 2 * eval_css(m, t) + eval_css(m, t - h)) / (h * h);
        const double err = std::abs(q - m.second_derivs[i]);
        CHECK(err < 50.0 * h * (1.0 + std::abs(m.second_derivs[i])));
        prev_err = std::min(prev_err, err);
      }
    }
  }
}

TEST_CASE("css residuals are orthogonal to affine functions") {
  const auto data = noisy_1d(100, 7);
  for (double lam : {1e-5, 1e-2, 1.0}) {
    const auto m = fit_css(data, lam);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      s0 += data.y[i] - m.fitted[i];
      s1 += data.points[i] * (data.y[i] - m.fitted[i]);
    }
    CHECK(std::abs(s0) < 1e-8);
    CHECK(std::abs(s1) < 1e-8);
  }
}

TEST_CASE("css fits shrink toward the affine fit") {
  const auto data = noisy_1d(80, 2);
  const auto ls = affine_ls_fit(data);
  double prev = INFINITY;
  for (double lam : {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 100.0}) {
    const auto m = fit_css(data, lam);
    double d = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) d += (m.fitted[i] - ls[i]) * (m.fitted[i] - ls[i]);
    CHECK(std::sqrt(d) <= prev + 1e-12);
    prev = std::sqrt(d);
  }
}

TEST_CASE("css is linear beyond the end knots") {
  const auto m = fit_css(make_dataset(1, {-0.5, -0.1, 0.2, 0.6}, {1.0, -1.0, 0.5, 2.0}), 0.01);
  const double slope = (eval_css(m, -0.7) - eval_css(m, -0.9)) / 0.2;
  CHECK(eval_css(m, -0.6) == doctest::Approx(eval_css(m, -0.7) + 0.1 * slope).epsilon(1e-12));
}

TEST_CASE("css domain errors") {
  CHECK_THROWS_AS(fit_css(make_dataset(1, {0.0, 0.0, 0.5}, {1, 2, 3}), 0.1), DomainError);
  CHECK_THROWS_AS(fit_css(make_dataset(1, {0.0, 0.5}, {1, 2}), 0.1), DomainError);
  CHECK_THROWS_AS(fit_css(make_dataset(1, {-0.5, 0.0, 0.5}, {1, 2, 3}), -1.0), DomainError);
}

TEST_CASE("tps kernel") {
  CHECK(tps_kernel(1.0) == 0.0);
  CHECK(tps_kernel(0.0) == 0.0);
  CHECK(tps_kernel(2.0) == doctest::Approx(4.0 * std::log(2.0)));
}

TEST_CASE("tps on planar data") {
  const auto data = disk_data(40, 3, true);
  for (double lam : {0.0, 1e-4, 1.0}) {
    const auto m = fit_tps(data, lam);
    for (double a : m.a) CHECK(std::abs(a) < 1e-8);
    CHECK(m.poly[0] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(m.poly[1] == doctest::Approx(-1.2).epsilon(1e-9));
    CHECK(m.poly[2] == doctest::Approx(0.7).epsilon(1e-9));
    const double x[2] = {0.2, -0.6};
    CHECK(std::abs(eval_tps(m, x) - (0.3 - 1.2 * 0.2 + 0.7 * -0.6)) < 1e-8);
  }
}

TEST_CASE("tps interpolation, side conditions and residual identity") {
  const auto data = disk_data(60, 4, false);
  const auto interp = fit_tps(data, 0.0);
  const auto f0 = eval_tps(interp, data.points, data.size());
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(f0[i] - data.y[i]) < 1e-6);
  for (double lam : {0.0, 1e-5, 1e-2}) {
    const auto m = fit_tps(data, lam);
    double s = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      s += m.a[i];
      sx += m.a[i] * data.points[2 * i];
      sy += m.a[i] * data.points[2 * i + 1];
    }
    CHECK(std::abs(s) < 1e-8);
    CHECK(std::abs(sx) < 1e-8);
    CHECK(std::abs(sy) < 1e-8);
    // y - f = N lambda a at the centers
    const auto f = eval_tps(m, data.points, data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      CHECK(std::abs(data.y[i] - f[i] - static_cast<double>(data.size()) * lam * m.a[i]) < 1e-7);
  }
}

TEST_CASE("tps with a = 0 is affine") {
  TpsModel m;
  m.centers = {0.1, 0.2, -0.3, 0.4};
  m.a = {0.0, 0.0};
  m.poly = {1.0, 2.0, -3.0};
  const double x[2] = {0.5, 0.25};
  CHECK(eval_tps(m, x) == doctest::Approx(1.0 + 1.0 - 0.75));
}

TEST_CASE("tps domain errors") {
  CHECK_THROWS_AS(fit_tps(make_dataset(2, {0, 0, 0.1, 0.1, 0.2, 0.2, 0.3, 0.3}, {1, 2, 3, 4}), 0.1), DomainError);
  CHECK_THROWS_AS(fit_tps(make_dataset(2, {0, 0, 0.1, 0.2, 0.3, 0.1}, {1, 2, 3}), 0.1), DomainError);
  CHECK_THROWS_AS(fit_tps(make_dataset(2, {0, 0, 0, 0, 0.3, 0.1, 0.2, -0.5}, {1, 2, 3, 4}), 0.1), DomainError);
}
