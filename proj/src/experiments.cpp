#include "adaptix/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "adaptix/error.hpp"
#include "adaptix/parallel.hpp"
#include "adaptix/rng.hpp"

namespace adaptix {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

Dataset with_responses(const Dataset& data, std::span<const double> y) {
  if (y.size() != data.size()) throw DimensionError("response vector length does not match the design");
  Dataset out = data;
  out.y.assign(y.begin(), y.end());
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::string_view estimator_name(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::ReluNet: return "relu";
    case EstimatorKind::TrendFilter: return "trend";
    case EstimatorKind::Css: return "css";
    case EstimatorKind::Tps: return "tps";
  }
  return "unknown";
}

FittedModel fit_estimator(const EstimatorSpec& spec, const Dataset& data, double lambda, const FittedModel* warm) {
  switch (spec.kind) {
    case EstimatorKind::ReluNet: {
      TrainConfig cfg = spec.train;
      cfg.lambda = lambda;
      if (cfg.width == 0) cfg.width = data.size();
      if (cfg.step_size <= 0.0) cfg.step_size = suggested_step_size(data);
      return train(data, cfg).params;
    }
    case EstimatorKind::TrendFilter: {
      const SplineModel* seed = warm != nullptr ? std::get_if<SplineModel>(warm) : nullptr;
      return fit_trend(data, lambda, {}, spec.trend, seed).model;
    }
    case EstimatorKind::Css: return fit_css(data, lambda);
    case EstimatorKind::Tps: return fit_tps(data, lambda);
  }
  throw Error("unknown estimator");
}

std::size_t model_dim(const FittedModel& model) {
  return std::visit(overloaded{[](const NetworkParams& n) { return n.d; },
                               [](const SplineModel&) { return std::size_t{1}; },
                               [](const CssModel&) { return std::size_t{1}; },
                               [](const TpsModel&) { return std::size_t{2}; }},
                    model);
}

std::vector<double> predict(const FittedModel& model, std::span<const double> points, std::size_t d) {
  if (d != model_dim(model)) throw DimensionError("predict: model and points differ in dimension");
  return std::visit(overloaded{[&](const NetworkParams& n) { return forward_batch(n, points); },
                               [&](const SplineModel& s) { return eval_spline(s, points); },
                               [&](const CssModel& c) { return eval_css(c, points); },
                               [&](const TpsModel& t) { return eval_tps(t, points, points.size() / 2); }},
                    model);
}

EvalGrid EvalGrid::equispaced(std::size_t n) { return {1, linspace(-1.0, 1.0, n)}; }

EvalGrid EvalGrid::monte_carlo(std::size_t d, std::size_t n, std::uint64_t seed) {
  return {d, uniform_ball_points(d, n, seed)};
}

EvalGrid EvalGrid::standard(std::size_t d, std::size_t n, std::uint64_t seed) {
  return d == 1 ? equispaced(n) : monte_carlo(d, n, seed);
}

double empirical_mse(std::span<const double> predictions, const TargetFunction& target,
                     std::span<const double> points) {
  const std::size_t d = target.dim();
  if (points.size() != predictions.size() * d) throw DimensionError("empirical_mse: size mismatch");
  if (predictions.empty()) throw DomainError("empirical_mse: no points");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = target(points.subspan(i * d, d)) - predictions[i];
    s += e * e;
  }
  return s / static_cast<double>(predictions.size());
}

double empirical_mse(const FittedModel& model, const TargetFunction& target, const EvalGrid& grid) {
  if (grid.d != target.dim()) throw DimensionError("empirical_mse: grid and target differ in dimension");
  return empirical_mse(predict(model, grid.points, grid.d), target, grid.points);
}

double empirical_mse(const FittedModel& model, const TargetFunction& target, const Dataset& data) {
  if (data.d != target.dim()) throw DimensionError("empirical_mse: data and target differ in dimension");
  return empirical_mse(predict(model, data.points, data.d), target, data.points);
}

SlopeFit loglog_slope(std::span<const double> sizes, std::span<const double> mses) {
  if (sizes.size() != mses.size()) throw DimensionError("loglog_slope: lengths differ");
  if (sizes.size() < 3) throw DomainError("loglog_slope: need at least three points");
  const std::size_t n = sizes.size();
  std::vector<double> lx(n);
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sizes[i] > 0.0) || !(mses[i] > 0.0)) throw DomainError("loglog_slope: entries must be positive");
    lx[i] = std::log(sizes[i]);
    ly[i] = std::log(mses[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("loglog_slope: sizes must not all be equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.halfwidth = 1.96 * std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  return fit;
}

std::vector<double> LambdaGrid::resolve(std::size_t n) const {
  if (!values.empty()) {
    for (double v : values)
      if (!(v > 0.0)) throw DomainError("lambda grid values must be positive");
    return values;
  }
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw DomainError("invalid lambda grid");
  double factor = 1.0;
  if (scale == Scale::TimesN) factor = static_cast<double>(n);
  if (scale == Scale::TimesSqrtN) factor = std::sqrt(static_cast<double>(n));
  std::vector<double> out(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = factor * std::pow(10.0, a + (b - a) * t);
  }
  return out;
}

LambdaGrid default_lambda_grid(EstimatorKind kind) {
  using S = LambdaGrid::Scale;
  switch (kind) {
    case EstimatorKind::TrendFilter: return {1e-5, 1e1, 31, S::TimesSqrtN, {}};
    case EstimatorKind::Css: return {1e-10, 1e2, 49, S::Absolute, {}};
    case EstimatorKind::Tps: return {1e-9, 1e-1, 17, S::Absolute, {}};
    case EstimatorKind::ReluNet: return {1e-2, 1.0, 3, S::Absolute, {}};
  }
  return {};
}

TrainConfig relu_2d_config(const Dataset& data) {
  TrainConfig cfg;
  cfg.width = 128;
  cfg.lambda = 0.1;
  cfg.restarts = 5;
  cfg.max_iters = 80000;
  cfg.step_size = suggested_step_size(data);
  return cfg;
}

Selection select_lambda(const EstimatorSpec& spec, const Dataset& data, const TargetFunction* target,
                        const LambdaRule& rule, const EvalGrid* grid, std::uint64_t seed) {
  Selection sel;
  if (rule.kind == LambdaRule::Kind::Fixed) {
    if (!(rule.value >= 0.0)) throw DomainError("fixed lambda must be nonnegative");
    sel.lambda = rule.value;
    sel.model = fit_estimator(spec, data, rule.value);
    return sel;
  }
  const auto lambdas = rule.grid.resolve(data.size());
  // descending order lets the trend filter warm-start along the path
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
  sel.scores.resize(lambdas.size());

  if (rule.kind == LambdaRule::Kind::Oracle) {
    if (target == nullptr || grid == nullptr) throw DomainError("oracle lambda selection needs the target and a grid");
    std::vector<std::optional<FittedModel>> models(lambdas.size());
    const FittedModel* warm = nullptr;
    for (std::size_t i : order) {
      models[i] = fit_estimator(spec, data, lambdas[i], warm);
      warm = &*models[i];
      sel.scores[i] = {lambdas[i], empirical_mse(*models[i], *target, *grid)};
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < lambdas.size(); ++i)
      if (sel.scores[i].score < sel.scores[best].score) best = i;
    sel.lambda = lambdas[best];
    sel.model = std::move(*models[best]);
    return sel;
  }

  if (!(rule.holdout_fraction > 0.0 && rule.holdout_fraction < 1.0))
    throw DomainError("hold-out fraction must lie in (0, 1)");
  const std::size_t n = data.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  const auto n_hold = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(rule.holdout_fraction * static_cast<double>(n))), 1, n - 1);
  std::vector<std::size_t> hold(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> keep(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
  std::sort(hold.begin(), hold.end());
  std::sort(keep.begin(), keep.end());
  const Dataset fit_part = data.subset(keep);
  const Dataset test_part = data.subset(hold);

  std::optional<FittedModel> warm;
  for (std::size_t i : order) {
    FittedModel m = fit_estimator(spec, fit_part, lambdas[i], warm ? &*warm : nullptr);
    const auto pred = predict(m, test_part.points, test_part.d);
    double s = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) s += (test_part.y[k] - pred[k]) * (test_part.y[k] - pred[k]);
    sel.scores[i] = {lambdas[i], s / static_cast<double>(pred.size())};
    warm = std::move(m);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (sel.scores[i].score < sel.scores[best].score) best = i;
  sel.lambda = lambdas[best];
  sel.model = fit_estimator(spec, data, sel.lambda);
  return sel;
}

void ExperimentSpec::validate() const {
  if (sizes.empty()) throw DomainError("experiment needs at least one sample size");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw DomainError("sample sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw DomainError("sample sizes must be strictly increasing");
  }
  if (trials == 0) throw DomainError("trials must be positive");
  if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  if (eval_points == 0) throw DomainError("eval_points must be positive");
}

std::uint64_t trial_seed(std::uint64_t study_seed, std::size_t size_index, std::size_t trial) {
  return derive_seed(derive_seed(study_seed, size_index + 1), trial);
}

void aggregate(RateResult& result) {
  const std::size_t m = result.sizes.size();
  result.mse_mean.assign(m, 0.0);
  result.mse_stderr.assign(m, 0.0);
  result.excluded_sizes.clear();
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t s = 0; s < m; ++s) {
    std::vector<double> vals;
    for (const auto& r : result.per_trial)
      if (r.size == result.sizes[s] && r.ok) vals.push_back(r.mse);
    if (vals.empty()) {
      result.mse_mean[s] = std::nan("");
      result.mse_stderr[s] = std::nan("");
      result.excluded_sizes.push_back(result.sizes[s]);
      continue;
    }
    const double k = static_cast<double>(vals.size());
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / k;
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    result.mse_mean[s] = mean;
    result.mse_stderr[s] = vals.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
    if (mean > 0.0) {
      xs.push_back(static_cast<double>(result.sizes[s]));
      ys.push_back(mean);
    } else {
      result.excluded_sizes.push_back(result.sizes[s]);
    }
  }
  if (xs.size() >= 3) {
    const auto fit = loglog_slope(xs, ys);
    result.slope = fit.slope;
    result.intercept = fit.intercept;
    result.slope_halfwidth = fit.halfwidth;
  } else {
    result.slope = result.intercept = result.slope_halfwidth = std::nan("");
  }
}

RateResult rate_study(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t d = spec.target.dim();
  const std::uint64_t grid_seed = derive_seed(spec.seed, 0);
  const EvalGrid grid = EvalGrid::standard(d, spec.eval_points, grid_seed);

  RateResult result;
  result.sizes = spec.sizes;
  const std::size_t total = spec.sizes.size() * spec.trials;
  result.per_trial.resize(total);
  std::set<std::uint64_t> ledger{grid_seed};
  for (std::size_t s = 0; s < spec.sizes.size(); ++s)
    for (std::size_t t = 0; t < spec.trials; ++t) {
      auto& rec = result.per_trial[s * spec.trials + t];
      rec.size = spec.sizes[s];
      rec.trial = t;
      rec.seed = trial_seed(spec.seed, s, t);
      if (!ledger.insert(rec.seed).second) throw Error("rate_study: trial seed collision");
    }

  parallel_for(total, resolve_threads(spec.threads), [&](std::size_t i) {
    auto& rec = result.per_trial[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      const Dataset data = make_dataset(spec.target, rec.size, spec.sigma, rec.seed, spec.design);
      const Selection sel = select_lambda(spec.estimator, data, &spec.target, spec.rule, &grid, derive_seed(rec.seed, 2));
      rec.lambda = sel.lambda;
      rec.mse = empirical_mse(sel.model, spec.target, grid);
      rec.ok = std::isfinite(rec.mse);
      if (!rec.ok) rec.error = "non-finite mse";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  for (std::size_t s = 0; s < spec.sizes.size(); ++s) {
    bool any = false;
    std::string why;
    for (std::size_t t = 0; t < spec.trials; ++t) {
      const auto& rec = result.per_trial[s * spec.trials + t];
      any = any || rec.ok;
      if (!rec.ok && why.empty()) why = rec.error;
    }
    if (!any) throw Error("rate_study: every trial failed at N = " + std::to_string(spec.sizes[s]) + ": " + why);
  }
  aggregate(result);
  return result;
}

std::vector<double> sup_grid(std::size_t d, std::size_t resolution) {
  if (d == 1) return linspace(-1.0, 1.0, 8 * resolution);
  if (d == 2) {
    const auto axis = linspace(-1.0, 1.0, resolution);
    std::vector<double> pts;
    for (double a : axis)
      for (double b : axis)
        if (a * a + b * b <= 1.0) {
          pts.push_back(a);
          pts.push_back(b);
        }
    return pts;
  }
  return uniform_ball_points(d, resolution * resolution, derive_seed(resolution, d));
}

ApproxResult approximation_study(const TargetFunction& target, std::span<const std::size_t> widths,
                                 const TrainConfig& base, const ApproxOptions& options) {
  for (std::size_t i = 0; i < widths.size(); ++i)
    if (widths[i] == 0 || (i > 0 && widths[i] <= widths[i - 1]))
      throw DomainError("widths must be positive and strictly increasing");
  const std::size_t d = target.dim();
  Dataset data;
  data.d = d;
  if (d == 1) {
    data.points = linspace(-1.0, 1.0, options.samples);
    data.design = Design::fixed();
  } else {
    data.points = uniform_ball_points(d, options.samples, derive_seed(options.seed, 0));
  }
  data.seed = options.seed;
  data.y.resize(options.samples);
  for (std::size_t i = 0; i < options.samples; ++i) data.y[i] = target(data.point(i));
  const auto grid = sup_grid(d, options.eval_resolution);
  const std::size_t m = grid.size() / d;
  std::vector<double> truth(m);
  for (std::size_t i = 0; i < m; ++i) truth[i] = target(std::span<const double>(grid).subspan(i * d, d));

  ApproxResult out;
  out.rate.sizes.assign(widths.begin(), widths.end());
  std::optional<NetworkParams> kept;
  double kept_err = 0.0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    TrainConfig cfg = base;
    cfg.width = widths[i];
    cfg.lambda = 0.0;
    if (cfg.step_size <= 0.0) cfg.step_size = suggested_step_size(data);
    cfg.seed = derive_seed(base.seed, i);
    cfg.warm_start = kept;
    TrialRecord rec;
    rec.size = widths[i];
    rec.seed = cfg.seed;
    const auto start = std::chrono::steady_clock::now();
    const auto fit = train(data, cfg);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double err = max_abs_diff(forward_batch(fit.params, grid), truth);
    if (!kept || err <= kept_err) {
      kept = fit.params;
      kept_err = err;
    }
    rec.mse = kept_err;
    out.rate.per_trial.push_back(rec);
    out.models.push_back(*kept);
  }
  aggregate(out.rate);
  return out;
}

NetworkParams embed_as_network(const SplineModel& model) {
  model.validate();
  NetworkParams net = NetworkParams::affine(1);
  net.c[0] = model.beta1;
  net.c0 = model.beta0;
  const double one = 1.0;
  for (std::size_t j = 0; j < model.knots.size(); ++j) net.add_neuron(model.coeffs[j], {&one, 1}, model.knots[j]);
  return net;
}

std::vector<double> probe_grid(std::size_t d, std::size_t count) {
  if (d == 1) return linspace(-1.0, 1.0, count);
  return uniform_ball_points(d, count, derive_seed(count, 17));
}

LinearityReport linearity_check(const EstimatorSpec& spec, double lambda, const Dataset& design,
                                std::span<const double> y1, std::span<const double> y2, double alpha,
                                double beta) {
  const auto probe = probe_grid(design.d);
  auto fit_at = [&](std::span<const double> y) {
    return predict(fit_estimator(spec, with_responses(design, y), lambda), probe, design.d);
  };
  const std::size_t n = design.size();
  std::vector<double> sum(n);
  std::vector<double> scaled(n);
  std::vector<double> combo(n);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i] = y1[i] + y2[i];
    scaled[i] = alpha * y1[i];
    combo[i] = alpha * y1[i] + beta * y2[i];
  }
  const auto f1 = fit_at(y1);
  const auto f2 = fit_at(y2);
  const auto fsum = fit_at(sum);
  const auto fscaled = fit_at(scaled);
  const auto fcombo = fit_at(combo);
  std::vector<double> add(f1.size());
  std::vector<double> hom(f1.size());
  std::vector<double> sup(f1.size());
  for (std::size_t i = 0; i < f1.size(); ++i) {
    add[i] = f1[i] + f2[i];
    hom[i] = alpha * f1[i];
    sup[i] = alpha * f1[i] + beta * f2[i];
  }
  return {max_abs_diff(fsum, add), max_abs_diff(fscaled, hom), max_abs_diff(fcombo, sup)};
}

LinearityReport linearity_probe(const EstimatorSpec& spec, double lambda, const Dataset& design,
                                std::size_t probes, std::uint64_t seed) {
  Rng rng(seed);
  LinearityReport worst;
  const std::size_t n = design.size();
  for (std::size_t p = 0; p < probes; ++p) {
    std::vector<double> y1(n);
    std::vector<double> y2(n);
    for (auto& v : y1) v = rng.normal();
    for (auto& v : y2) v = rng.normal();
    const double alpha = rng.uniform(-2.0, 2.0);
    const double beta = rng.uniform(-2.0, 2.0);
    const auto r = linearity_check(spec, lambda, design, y1, y2, alpha, beta);
    worst.additivity = std::max(worst.additivity, r.additivity);
    worst.homogeneity = std::max(worst.homogeneity, r.homogeneity);
    worst.superposition = std::max(worst.superposition, r.superposition);
  }
  return worst;
}

TrendWitness trend_filter_witness(const Dataset& design) {
  if (design.d != 1) throw DimensionError("trend_filter_witness needs a 1D design");
  TrendWitness w;
  w.y1.resize(design.size());
  for (std::size_t i = 0; i < design.size(); ++i) w.y1[i] = std::max(0.0, 1.0 - std::abs(design.points[i]) / 0.3);
  w.y2 = w.y1;
  w.lambda = 1.5 * trend_lambda_max(with_responses(design, w.y1));
  return w;
}

}  // namespace adaptix
