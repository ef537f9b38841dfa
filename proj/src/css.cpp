#include <algorithm>
#include <numeric>
#include <string>

#include "adaptix/banded.hpp"
#include "adaptix/error.hpp"
#include "adaptix/smoothers.hpp"

namespace adaptix {

void CssModel::validate() const {
  const std::size_t n = knots.size();
  if (fitted.size() != n || second_derivs.size() != n) throw DimensionError("CssModel: field lengths differ");
  if (n < 2) throw DomainError("CssModel: need at least two knots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(knots[i] > knots[i - 1])) throw DomainError("CssModel: knots must be strictly increasing");
}

CssModel fit_css(const Dataset& data, double lambda) {
  if (data.d != 1) throw DimensionError("fit_css needs 1D data");
  if (!(lambda >= 0.0)) throw DomainError("fit_css: lambda must be nonnegative");
  data.validate();
  const std::size_t n = data.size();
  if (n < 3) throw DomainError("fit_css needs at least three points");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.points[a] < data.points[b]; });
  CssModel m;
  m.lambda = lambda;
  m.knots.resize(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.knots[i] = data.points[order[i]];
    y[i] = data.y[order[i]];
  }
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = m.knots[i + 1] - m.knots[i];
    if (!(h[i] > 0.0)) throw DomainError("fit_css: duplicate design points");
  }

  // Q is N x (N-2); column j (interior knot j+1) has entries at rows j, j+1, j+2.
  const std::size_t k = n - 2;
  auto q = [&](std::size_t row, std::size_t col) {
    const std::size_t j = col + 1;
    if (row + 1 == j) return 1.0 / h[j - 1];
    if (row == j) return -1.0 / h[j - 1] - 1.0 / h[j];
    if (row == j + 1) return 1.0 / h[j];
    return 0.0;
  };

  BandedSpd sys(k, 2);
  for (std::size_t c = 0; c < k; ++c) {
    sys.at(c, c) += (h[c] + h[c + 1]) / 3.0;
    if (c + 1 < k) sys.at(c + 1, c) += h[c + 1] / 6.0;
  }
  if (lambda > 0.0) {
    for (std::size_t row = 0; row < n; ++row) {
      const std::size_t lo = row >= 2 ? row - 2 : 0;
      const std::size_t hi = std::min(row, k - 1);
      for (std::size_t c1 = lo; c1 <= hi; ++c1)
        for (std::size_t c2 = lo; c2 <= c1; ++c2) sys.at(c1, c2) += lambda * q(row, c1) * q(row, c2);
    }
  }
  std::vector<double> gamma(k);
  for (std::size_t c = 0; c < k; ++c) gamma[c] = q(c, c) * y[c] + q(c + 1, c) * y[c + 1] + q(c + 2, c) * y[c + 2];
  sys.factor();
  sys.solve(gamma);

  m.fitted = y;
  if (lambda > 0.0) {
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t row = c; row < c + 3; ++row) m.fitted[row] -= lambda * q(row, c) * gamma[c];
  }
  m.second_derivs.assign(n, 0.0);
  std::copy(gamma.begin(), gamma.end(), m.second_derivs.begin() + 1);
  return m;
}

double eval_css(const CssModel& m, double x) {
  const auto& t = m.knots;
  const auto& g = m.fitted;
  const auto& s = m.second_derivs;
  const std::size_t n = t.size();
  if (x <= t[0]) {
    const double h = t[1] - t[0];
    const double slope = (g[1] - g[0]) / h - h * s[1] / 6.0;
    return g[0] + slope * (x - t[0]);
  }
  if (x >= t[n - 1]) {
    const double h = t[n - 1] - t[n - 2];
    const double slope = (g[n - 1] - g[n - 2]) / h + h * s[n - 2] / 6.0;
    return g[n - 1] + slope * (x - t[n - 1]);
  }
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
  if (x == t[i]) return g[i];
  const double h = t[i + 1] - t[i];
  const double a = x - t[i];
  const double b = t[i + 1] - x;
  return (b * g[i] + a * g[i + 1]) / h - a * b / 6.0 * ((1.0 + a / h) * s[i + 1] + (1.0 + b / h) * s[i]);
}

std::vector<double> eval_css(const CssModel& model, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = eval_css(model, xs[i]);
  return out;
}

}  // namespace adaptix
