#include "adaptix/adaptive_spline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "adaptix/banded.hpp"
#include "adaptix/error.hpp"

namespace adaptix {

namespace {

double relu(double z) { return z > 0.0 ? z : 0.0; }
double sign(double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }

struct Sorted {
  std::vector<double> x;
  std::vector<double> y;
};

Sorted sorted_1d(const Dataset& data) {
  if (data.d != 1) throw DimensionError("trend filtering needs 1D data");
  data.validate();
  const std::size_t n = data.size();
  if (n < 2) throw DomainError("trend filtering needs at least two design points");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.points[a] < data.points[b]; });
  Sorted s;
  s.x.reserve(n);
  s.y.reserve(n);
  for (std::size_t i : order) {
    s.x.push_back(data.points[i]);
    s.y.push_back(data.y[i]);
  }
  for (std::size_t i = 1; i < n; ++i)
    if (!(s.x[i] > s.x[i - 1])) throw DomainError("duplicate design points are not allowed");
  return s;
}

/// Affine least squares of y on x: (intercept, slope).
std::pair<double, double> affine_fit(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - slope * mx, slope};
}

/// g[j] = sum_{n > j} (x_n - x_j) r_n for every data index j (g[N-1] = 0).
std::vector<double> hinge_correlations(const Sorted& s, std::span<const double> r) {
  const std::size_t n = s.x.size();
  std::vector<double> g(n, 0.0);
  double tail = 0.0;  // sum_{m > j} r_m
  for (std::size_t j = n - 1; j-- > 0;) {
    tail += r[j + 1];
    g[j] = g[j + 1] + (s.x[j + 1] - s.x[j]) * tail;
  }
  return g;
}

double kkt_scale(double lambda) { return std::max(1.0, lambda); }

// ---------------------------------------------------------------------------
// Active-set solver over knots at interior design points.

class ActiveSetSolver {
 public:
  ActiveSetSolver(const Sorted& s, double lambda) : s_(s), lambda_(lambda), n_(s.x.size()) {}

  /// Minimizes the restricted problem with knots `active` (sorted data
  /// indices) and fixed signs. Writes fitted values and coefficients (dense,
  /// length N).
  void restricted_solve(std::span<const std::size_t> active, std::span<const double> signs,
                        std::vector<double>& fitted, std::vector<double>& coef) const {
    const auto& x = s_.x;
    const auto& y = s_.y;
    std::vector<std::size_t> nodes;
    nodes.reserve(active.size() + 2);
    nodes.push_back(0);
    nodes.insert(nodes.end(), active.begin(), active.end());
    nodes.push_back(n_ - 1);
    const std::size_t m = nodes.size();
    std::vector<double> h(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) h[i] = x[nodes[i + 1]] - x[nodes[i]];

    BandedSpd gram(m, 1);
    std::vector<double> rhs(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      for (std::size_t p = nodes[i]; p < nodes[i + 1]; ++p) {
        const double t = (x[p] - x[nodes[i]]) / h[i];
        const double u = 1.0 - t;
        gram.at(i, i) += u * u;
        gram.at(i + 1, i) += u * t;
        gram.at(i + 1, i + 1) += t * t;
        rhs[i] += u * y[p];
        rhs[i + 1] += t * y[p];
      }
    }
    gram.at(m - 1, m - 1) += 1.0;
    rhs[m - 1] += y[n_ - 1];

    const double half = 0.5 * lambda_;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const double sg = signs[i - 1];
      rhs[i - 1] -= half * sg / h[i - 1];
      rhs[i] += half * sg * (1.0 / h[i - 1] + 1.0 / h[i]);
      rhs[i + 1] -= half * sg / h[i];
    }
    gram.factor();
    gram.solve(rhs);

    fitted.assign(n_, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      for (std::size_t p = nodes[i]; p < nodes[i + 1]; ++p) {
        const double t = (x[p] - x[nodes[i]]) / h[i];
        fitted[p] = p == nodes[i] ? rhs[i] : (1.0 - t) * rhs[i] + t * rhs[i + 1];
      }
    }
    fitted[n_ - 1] = rhs[m - 1];
    coef.assign(n_, 0.0);
    for (std::size_t i = 1; i + 1 < m; ++i)
      coef[nodes[i]] = (rhs[i + 1] - rhs[i]) / h[i] - (rhs[i] - rhs[i - 1]) / h[i - 1];
  }

  double objective(std::span<const double> fitted, std::span<const double> coef) const {
    double loss = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = s_.y[i] - fitted[i];
      loss += r * r;
    }
    double pen = 0.0;
    for (double c : coef) pen += std::abs(c);
    return loss + lambda_ * pen;
  }

  TrendDiagnostics run(std::vector<double>& fitted, std::vector<double>& coef, const TrendSolverConfig& cfg) {
    TrendDiagnostics diag;
    const double tol = cfg.tol * kkt_scale(lambda_);
    std::vector<std::size_t> active;
    for (std::size_t j = 1; j + 1 < n_; ++j)
      if (coef[j] != 0.0) active.push_back(j);

    std::vector<double> signs;
    std::vector<double> new_fit;
    std::vector<double> new_coef;
    double value = objective(fitted, coef);
    diag.objective_history.push_back(value);
    bool need_solve = true;

    while (diag.sweeps < cfg.max_sweeps) {
      if (need_solve) {
        signs.clear();
        for (std::size_t j : active) signs.push_back(coef[j] != 0.0 ? sign(coef[j]) : pending_sign_[j]);
        restricted_solve(active, signs, new_fit, new_coef);
        const double t = line_search(active, fitted, coef, new_fit, new_coef);
        if (t >= 1.0) {
          fitted = new_fit;
          for (std::size_t j : active) coef[j] = new_coef[j];
        } else {
          for (std::size_t i = 0; i < n_; ++i) fitted[i] += t * (new_fit[i] - fitted[i]);
          for (std::size_t j : active) {
            const double c = coef[j] + t * (new_coef[j] - coef[j]);
            coef[j] = crossing(coef[j], new_coef[j]) == t ? 0.0 : c;
          }
        }
        bool consistent = t >= 1.0;
        for (std::size_t a = 0; a < active.size() && consistent; ++a)
          consistent = coef[active[a]] == 0.0 || sign(coef[active[a]]) == signs[a];
        std::erase_if(active, [&](std::size_t j) { return coef[j] == 0.0; });
        ++diag.sweeps;
        const double next = objective(fitted, coef);
        diag.objective_history.push_back(next);
        const bool stalled = !(next < value);
        value = next;
        if (!consistent) {
          if (stalled) break;
          continue;
        }
        need_solve = false;
      }

      std::vector<double> r(n_);
      for (std::size_t i = 0; i < n_; ++i) r[i] = s_.y[i] - fitted[i];
      const auto g = hinge_correlations(s_, r);
      double worst = 0.0;
      std::size_t worst_j = 0;
      std::size_t a = 0;
      for (std::size_t j = 1; j + 1 < n_; ++j) {
        if (a < active.size() && active[a] == j) {
          ++a;
          continue;
        }
        const double viol = 2.0 * std::abs(g[j]) - lambda_;
        if (viol > worst) {
          worst = viol;
          worst_j = j;
        }
      }
      if (worst <= tol) {
        diag.converged = true;
        break;
      }
      if (last_added_ == worst_j && !made_progress(diag)) break;
      last_added_ = worst_j;
      pending_sign_[worst_j] = sign(g[worst_j]);
      active.insert(std::upper_bound(active.begin(), active.end(), worst_j), worst_j);
      need_solve = true;
    }
    diag.objective = value;
    return diag;
  }

  void reset_pending() { pending_sign_.assign(n_, 0.0); }

 private:
  static double crossing(double from, double to) {
    if (from == 0.0 || sign(from) == sign(to)) return 2.0;
    return from / (from - to);
  }

  static bool made_progress(const TrendDiagnostics& diag) {
    const auto& h = diag.objective_history;
    return h.size() < 2 || h[h.size() - 1] < h[h.size() - 2];
  }

  /// Discrete line search over the sign-change points of the segment
  /// [current, restricted solution]; returns the best step in (0, 1].
  double line_search(std::span<const std::size_t> active, std::span<const double> fitted,
                     std::span<const double> coef, std::span<const double> new_fit,
                     std::span<const double> new_coef) const {
    double rr = 0.0;
    double rd = 0.0;
    double dd = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = s_.y[i] - fitted[i];
      const double dlt = new_fit[i] - fitted[i];
      rr += r * r;
      rd += r * dlt;
      dd += dlt * dlt;
    }
    auto value_at = [&](double t) {
      double pen = 0.0;
      for (std::size_t j : active) pen += std::abs(coef[j] + t * (new_coef[j] - coef[j]));
      return rr - 2.0 * t * rd + t * t * dd + lambda_ * pen;
    };
    double best_t = 1.0;
    double best = value_at(1.0);
    for (std::size_t j : active) {
      const double t = crossing(coef[j], new_coef[j]);
      if (t > 0.0 && t < 1.0) {
        const double v = value_at(t);
        if (v < best) {
          best = v;
          best_t = t;
        }
      }
    }
    return best_t;
  }

  const Sorted& s_;
  double lambda_;
  std::size_t n_;
  std::vector<double> pending_sign_;
  std::size_t last_added_ = 0;
};

// ---------------------------------------------------------------------------
// Cyclic coordinate descent in the hinge basis with arbitrary knots.

struct CdOutcome {
  double beta0;
  double beta1;
  std::vector<double> coef;
  TrendDiagnostics diag;
};

CdOutcome coordinate_descent(const Sorted& s, std::span<const double> knots, double lambda,
                             const TrendSolverConfig& cfg) {
  const std::size_t n = s.x.size();
  const std::size_t p = knots.size();
  std::vector<double> cols(p * n);
  std::vector<double> norms(p, 0.0);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double a = relu(s.x[i] - knots[j]);
      cols[j * n + i] = a;
      norms[j] += a * a;
    }

  auto [beta0, beta1] = affine_fit(s.x, s.y);
  std::vector<double> coef(p, 0.0);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = s.y[i] - beta0 - beta1 * s.x[i];

  auto objective = [&] {
    double loss = 0.0;
    for (double v : r) loss += v * v;
    double pen = 0.0;
    for (double c : coef) pen += std::abs(c);
    return loss + lambda * pen;
  };
  auto kkt = [&] {
    double worst = 0.0;
    double sr = 0.0;
    double sxr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sr += r[i];
      sxr += s.x[i] * r[i];
    }
    worst = std::max({worst, 2.0 * std::abs(sr), 2.0 * std::abs(sxr)});
    for (std::size_t j = 0; j < p; ++j) {
      if (norms[j] == 0.0) continue;
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += cols[j * n + i] * r[i];
      const double viol = coef[j] != 0.0 ? std::abs(2.0 * g - lambda * sign(coef[j]))
                                         : std::max(0.0, 2.0 * std::abs(g) - lambda);
      worst = std::max(worst, viol);
    }
    return worst;
  };

  TrendDiagnostics diag;
  double value = objective();
  diag.objective_history.push_back(value);
  const double half = 0.5 * lambda;
  while (diag.sweeps < cfg.max_sweeps) {
    for (std::size_t j = 0; j < p; ++j) {
      if (norms[j] == 0.0) continue;
      const double* a = cols.data() + j * n;
      double rho = norms[j] * coef[j];
      for (std::size_t i = 0; i < n; ++i) rho += a[i] * r[i];
      const double shrunk = std::abs(rho) > half ? (rho - half * sign(rho)) / norms[j] : 0.0;
      const double delta = shrunk - coef[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= delta * a[i];
        coef[j] = shrunk;
      }
    }
    const auto [d0, d1] = affine_fit(s.x, r);
    beta0 += d0;
    beta1 += d1;
    for (std::size_t i = 0; i < n; ++i) r[i] -= d0 + d1 * s.x[i];
    ++diag.sweeps;
    value = objective();
    diag.objective_history.push_back(value);
    diag.kkt_residual = kkt() / kkt_scale(lambda);
    if (diag.kkt_residual <= cfg.tol) {
      diag.converged = true;
      break;
    }
  }
  diag.objective = value;
  return {beta0, beta1, std::move(coef), std::move(diag)};
}

}  // namespace

void SplineModel::validate() const {
  if (knots.size() != coeffs.size()) throw DimensionError("SplineModel: knots and coeffs differ in length");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw DomainError("SplineModel: knots must be strictly increasing");
}

double eval_spline(const SplineModel& model, double x) {
  double f = model.beta0 + model.beta1 * x;
  for (std::size_t j = 0; j < model.knots.size(); ++j) f += model.coeffs[j] * relu(x - model.knots[j]);
  return f;
}

std::vector<double> eval_spline(const SplineModel& model, std::span<const double> xs) {
  // value and slope just right of each knot, accumulated left to right
  const std::size_t k = model.knots.size();
  std::vector<double> value(k);
  std::vector<double> slope(k);
  double v = 0.0;
  double sl = model.beta1;
  double prev = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    v = j == 0 ? model.beta0 + model.beta1 * model.knots[0] : v + sl * (model.knots[j] - prev);
    sl += model.coeffs[j];
    value[j] = v;
    slope[j] = sl;
    prev = model.knots[j];
  }
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const auto it = std::upper_bound(model.knots.begin(), model.knots.end(), x);
    if (it == model.knots.begin()) {
      out[i] = model.beta0 + model.beta1 * x;
    } else {
      const std::size_t j = static_cast<std::size_t>(it - model.knots.begin()) - 1;
      out[i] = value[j] + slope[j] * (x - model.knots[j]);
    }
  }
  return out;
}

double tv2(const SplineModel& model) {
  double s = 0.0;
  for (double c : model.coeffs) s += std::abs(c);
  return s;
}

double trend_objective(const SplineModel& model, const Dataset& data, double lambda) {
  if (data.d != 1) throw DimensionError("trend_objective needs 1D data");
  const auto f = eval_spline(model, data.points);
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) loss += (data.y[i] - f[i]) * (data.y[i] - f[i]);
  return loss + lambda * tv2(model);
}

double trend_lambda_max(const Dataset& data) {
  const Sorted s = sorted_1d(data);
  const auto [b0, b1] = affine_fit(s.x, s.y);
  std::vector<double> r(s.x.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = s.y[i] - b0 - b1 * s.x[i];
  const auto g = hinge_correlations(s, r);
  double m = 0.0;
  for (std::size_t j = 1; j + 1 < g.size(); ++j) m = std::max(m, 2.0 * std::abs(g[j]));
  return m;
}

double trend_kkt_residual(const SplineModel& model, const Dataset& data, double lambda) {
  const Sorted s = sorted_1d(data);
  const std::size_t n = s.x.size();
  const auto f = eval_spline(model, s.x);
  std::vector<double> r(n);
  double sr = 0.0;
  double sxr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = s.y[i] - f[i];
    sr += r[i];
    sxr += s.x[i] * r[i];
  }
  const auto g = hinge_correlations(s, r);
  double worst = std::max(2.0 * std::abs(sr), 2.0 * std::abs(sxr));
  std::size_t k = 0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    double c = 0.0;
    if (k < model.knots.size() && model.knots[k] == s.x[j]) c = model.coeffs[k++];
    const double viol = c != 0.0 ? std::abs(2.0 * g[j] - lambda * sign(c)) : std::max(0.0, 2.0 * std::abs(g[j]) - lambda);
    worst = std::max(worst, viol);
  }
  if (k != model.knots.size()) throw DomainError("trend_kkt_residual: model knots are not interior design points");
  return worst / kkt_scale(lambda);
}

TrendFit fit_trend(const Dataset& data, double lambda, std::optional<std::vector<double>> knot_grid,
                   const TrendSolverConfig& solver, const SplineModel* warm) {
  if (!(lambda >= 0.0)) throw DomainError("fit_trend: lambda must be nonnegative");
  if (!(solver.tol > 0.0) || solver.max_sweeps == 0) throw DomainError("fit_trend: invalid solver settings");
  const Sorted s = sorted_1d(data);
  const std::size_t n = s.x.size();
  TrendFit fit;

  if (knot_grid || solver.method == TrendMethod::CoordinateDescent) {
    std::vector<double> knots;
    if (knot_grid) {
      knots = *knot_grid;
      for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!(knots[i] > -1.0 && knots[i] < 1.0)) throw DomainError("knot grid must lie inside (-1, 1)");
        if (i > 0 && !(knots[i] > knots[i - 1])) throw DomainError("knot grid must be strictly increasing");
      }
    } else {
      knots.assign(s.x.begin() + 1, s.x.end() - 1);
    }
    auto out = coordinate_descent(s, knots, lambda, solver);
    fit.model.beta0 = out.beta0;
    fit.model.beta1 = out.beta1;
    for (std::size_t j = 0; j < knots.size(); ++j)
      if (out.coef[j] != 0.0) {
        fit.model.knots.push_back(knots[j]);
        fit.model.coeffs.push_back(out.coef[j]);
      }
    fit.diagnostics = std::move(out.diag);
    return fit;
  }

  std::vector<double> fitted(n, 0.0);
  std::vector<double> coef(n, 0.0);
  if (warm != nullptr) {
    warm->validate();
    std::size_t k = 0;
    for (std::size_t j = 1; j + 1 < n && k < warm->knots.size(); ++j)
      if (warm->knots[k] == s.x[j]) coef[j] = warm->coeffs[k++];
    if (k == warm->knots.size()) {
      fitted = eval_spline(*warm, s.x);
    } else {
      std::fill(coef.begin(), coef.end(), 0.0);  // knots do not match this design
    }
  }
  ActiveSetSolver solver_impl(s, lambda);
  solver_impl.reset_pending();
  fit.diagnostics = solver_impl.run(fitted, coef, solver);

  fit.model.beta1 = (fitted[1] - fitted[0]) / (s.x[1] - s.x[0]);
  fit.model.beta0 = fitted[0] - fit.model.beta1 * s.x[0];
  for (std::size_t j = 1; j + 1 < n; ++j)
    if (coef[j] != 0.0) {
      fit.model.knots.push_back(s.x[j]);
      fit.model.coeffs.push_back(coef[j]);
    }
  fit.diagnostics.kkt_residual = trend_kkt_residual(fit.model, data, lambda);
  fit.diagnostics.objective = trend_objective(fit.model, data, lambda);
  return fit;
}

}  // namespace adaptix
