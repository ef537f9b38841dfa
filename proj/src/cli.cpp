#include "adaptix/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <variant>

#include "adaptix/error.hpp"
#include "adaptix/experiments.hpp"
#include "adaptix/io.hpp"
#include "adaptix/parallel.hpp"
#include "adaptix/rng.hpp"
#include "adaptix/svg.hpp"

namespace adaptix::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string config;
  std::string out;
  std::size_t seed = 0;  // 64-bit seeds on the supported targets
  std::size_t threads = 0;
  std::string target = "inhom1d";
  std::size_t segments = 16;
  double ridge_angle = 1.0;
  double ridge_period = 0.8;
  double ridge_amplitude = 1.0;
  std::size_t n = 256;
  double sigma = 0.25;
  std::string design = "auto";
  std::string data;
  std::string model;
  std::string estimator = "trend";
  std::vector<std::string> estimators{"trend", "css"};
  double lambda = 1.0;
  std::string rule = "oracle";
  double holdout_fraction = 0.25;
  double lambda_lo = 1e-5;
  double lambda_hi = 1e2;
  std::size_t lambda_count = 25;
  std::string lambda_scale = "n";
  std::string objective = "weight_decay";
  std::size_t width = 0;
  std::size_t restarts = 1;
  std::size_t max_iters = 20000;
  double step_size = 0.0;
  double momentum = 0.9;
  double init_scale = 1.0;
  std::vector<std::size_t> sizes{64, 128, 256, 512, 1024};
  std::size_t trials = 5;
  std::size_t eval_points = 0;
  std::string preset;
  std::vector<std::size_t> widths{8, 16, 32, 64, 128};
  std::size_t samples = 4096;
  std::string figure = "fig1";
  bool timing = false;
};

static_assert(sizeof(std::size_t) == sizeof(std::uint64_t));

using Slot = std::variant<std::string*, std::size_t*, double*, bool*, std::vector<std::size_t>*,
                          std::vector<std::string>*>;

struct Field {
  std::string name;
  std::string help;
  Slot slot;
  std::vector<std::string> commands;  // empty: every command
};

const std::vector<std::string> kCommands{"generate", "fit", "evaluate", "rate-study", "approx-study", "reproduce"};

const std::map<std::string, std::string> kAbout{
    {"generate", "sample a noisy dataset from a target"},
    {"fit", "fit one estimator to a CSV dataset"},
    {"evaluate", "score a saved model against a target"},
    {"rate-study", "MSE versus sample size for several estimators"},
    {"approx-study", "sup-norm error versus network width"},
    {"reproduce", "rebuild a figure: fig1, fig2 or fig3"},
};

std::vector<Field> fields(Settings& s) {
  const std::vector<std::string> targets{"generate", "evaluate", "rate-study", "approx-study", "reproduce"};
  const std::vector<std::string> nets{"fit", "rate-study", "approx-study", "reproduce"};
  const std::vector<std::string> grids{"rate-study"};
  return {
      {"out", "output path prefix", &s.out, {}},
      {"seed", "random seed", &s.seed, {}},
      {"threads", "worker threads (0: all cores; ADAPTIX_THREADS overrides)", &s.threads, {}},
      {"target", "inhom1d | gauss2d | ridge2d (approx-study default: ridge2d)", &s.target, targets},
      {"segments", "segments of the inhomogeneous 1D target", &s.segments, targets},
      {"ridge_angle", "ridge direction angle (radians)", &s.ridge_angle, targets},
      {"ridge_period", "ridge waveform period", &s.ridge_period, targets},
      {"ridge_amplitude", "ridge waveform amplitude", &s.ridge_amplitude, targets},
      {"n", "number of samples", &s.n, {"generate", "reproduce"}},
      {"sigma", "noise standard deviation", &s.sigma, {"generate", "rate-study", "reproduce"}},
      {"design", "fixed | ball | auto (fixed in 1D)", &s.design, {"generate", "rate-study"}},
      {"data", "dataset CSV", &s.data, {"fit", "evaluate"}},
      {"model", "model JSON", &s.model, {"evaluate"}},
      {"estimator", "relu | trend | css | tps", &s.estimator, {"fit"}},
      {"estimators", "comma-separated estimators", &s.estimators, {"rate-study"}},
      {"lambda", "regularization (TPS uses N*lambda in its system)", &s.lambda, {"fit", "rate-study", "reproduce"}},
      {"rule", "oracle | holdout | fixed", &s.rule, grids},
      {"holdout_fraction", "held-out fraction for the holdout rule", &s.holdout_fraction, grids},
      {"lambda_lo", "lambda grid lower end (before scaling)", &s.lambda_lo, grids},
      {"lambda_hi", "lambda grid upper end (before scaling)", &s.lambda_hi, grids},
      {"lambda_count", "lambda grid points", &s.lambda_count, grids},
      {"lambda_scale", "absolute | n | sqrt_n", &s.lambda_scale, grids},
      {"objective", "weight_decay | path_norm", &s.objective, nets},
      {"width", "network width (0: N)", &s.width, nets},
      {"restarts", "training restarts", &s.restarts, nets},
      {"max_iters", "gradient iterations per restart", &s.max_iters, nets},
      {"step_size", "step size (0: data-scaled default)", &s.step_size, nets},
      {"momentum", "heavy-ball momentum", &s.momentum, nets},
      {"init_scale", "initialization scale", &s.init_scale, nets},
      {"sizes", "comma-separated sample sizes", &s.sizes, {"rate-study"}},
      {"trials", "trials per size", &s.trials, {"rate-study"}},
      {"eval_points", "population-MSE quadrature points (0: 4096 in 1D, 10000 otherwise)", &s.eval_points,
       {"evaluate", "rate-study"}},
      {"preset", "named study (1d-gap)", &s.preset, {"rate-study"}},
      {"widths", "comma-separated widths", &s.widths, {"approx-study"}},
      {"samples", "noiseless samples", &s.samples, {"approx-study"}},
      {"figure", "fig1 | fig2 | fig3", &s.figure, {"reproduce"}},
      {"timing", "also write per-trial fit seconds (not deterministic)", &s.timing, {"rate-study"}},
  };
}

bool allowed(const Field& f, const std::string& cmd) {
  return f.commands.empty() || std::find(f.commands.begin(), f.commands.end(), cmd) != f.commands.end();
}

std::string flag_name(const std::string& name) {
  std::string s = "--" + name;
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

void assign_from_json(const Field& f, const Json& v) {
  try {
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("expected a string");
            *p = v.get<std::string>();
          } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("expected true or false");
            *p = v.get<bool>();
          } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError("expected a number");
            *p = v.get<double>();
          } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            if (!v.is_array()) throw ConfigError("expected an array of strings");
            *p = v.get<std::vector<std::string>>();
          } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
            if (!v.is_array()) throw ConfigError("expected an array of nonnegative integers");
            T out;
            for (const auto& e : v) {
              if (!e.is_number_unsigned()) throw ConfigError("expected an array of nonnegative integers");
              out.push_back(e.get<std::size_t>());
            }
            *p = out;
          } else {
            if (!v.is_number_unsigned()) throw ConfigError("expected a nonnegative integer");
            *p = v.get<T>();
          }
        },
        f.slot);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("field '") + f.name + "': " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("field '") + f.name + "': " + e.what());
  }
}

Json slot_json(const Slot& slot) {
  return std::visit([](auto* p) { return Json(*p); }, slot);
}

// ---------------------------------------------------------------------------

struct Artifacts {
  std::vector<std::pair<fs::path, std::string>> files;
  Json result = Json::object();

  void add(const fs::path& p, std::string content) { files.emplace_back(p, std::move(content)); }
};

struct Context {
  std::string command;
  Settings s;
  std::set<std::string> given;
  Json config;  // resolved settings echo

  bool has(const std::string& name) const { return given.count(name) > 0; }
  fs::path path(const std::string& suffix) const { return fs::path(s.out + suffix); }
};

TargetFunction make_target(const Context& c) {
  const auto& s = c.s;
  if (s.target == "inhom1d") return TargetFunction::inhomogeneous_1d(s.segments);
  if (s.target == "gauss2d") return TargetFunction::gaussian_mix_2d();
  if (s.target == "ridge2d") return TargetFunction::triangle_ridge_2d(s.ridge_angle, s.ridge_period, s.ridge_amplitude);
  throw ConfigError("field 'target': unknown target '" + s.target + "'");
}

EstimatorKind parse_estimator(const std::string& name) {
  for (auto k : {EstimatorKind::ReluNet, EstimatorKind::TrendFilter, EstimatorKind::Css, EstimatorKind::Tps})
    if (estimator_name(k) == name) return k;
  throw ConfigError("unknown estimator '" + name + "' (relu | trend | css | tps)");
}

Design make_design(const Context& c, std::size_t d) {
  if (c.s.design == "fixed") return Design::fixed();
  if (c.s.design == "ball") return Design::uniform_ball();
  if (c.s.design == "auto") return d == 1 ? Design::fixed() : Design::uniform_ball();
  throw ConfigError("field 'design': expected fixed, ball or auto");
}

TrainConfig make_train(const Context& c, TrainConfig cfg) {
  const auto& s = c.s;
  if (c.has("objective") || c.command != "reproduce") {
    if (s.objective == "weight_decay") cfg.objective_kind = ObjectiveKind::WeightDecay;
    else if (s.objective == "path_norm") cfg.objective_kind = ObjectiveKind::PathNorm;
    else throw ConfigError("field 'objective': expected weight_decay or path_norm");
  }
  if (c.has("width") || c.command != "reproduce") cfg.width = s.width;
  if (c.has("restarts") || c.command != "reproduce") cfg.restarts = s.restarts;
  if (c.has("max_iters") || c.command != "reproduce") cfg.max_iters = s.max_iters;
  if (c.has("step_size") || c.command != "reproduce") cfg.step_size = s.step_size;
  if (c.has("momentum") || c.command != "reproduce") cfg.momentum = s.momentum;
  if (c.has("init_scale") || c.command != "reproduce") cfg.init_scale = s.init_scale;
  cfg.seed = s.seed;
  return cfg;
}

std::size_t default_eval_points(std::size_t d) { return d == 1 ? 4096 : 10000; }

std::string csv_row(std::initializer_list<double> values) {
  std::string out;
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += io::format_double(v);
    first = false;
  }
  return out + "\n";
}

/// Curve of a fitted model: 1001 points in 1D, cell centers of a 128 x 128
/// lattice inside the disk in 2D.
std::string curve_csv(const FittedModel& model) {
  const std::size_t d = model_dim(model);
  std::string out;
  if (d == 1) {
    const auto xs = linspace(-1.0, 1.0, 1001);
    const auto f = predict(model, xs, 1);
    out = "x1,f\n";
    for (std::size_t i = 0; i < xs.size(); ++i) out += csv_row({xs[i], f[i]});
    return out;
  }
  std::vector<double> pts;
  for (std::size_t r = 0; r < 128; ++r)
    for (std::size_t q = 0; q < 128; ++q) {
      const double x = -1.0 + (static_cast<double>(q) + 0.5) / 64.0;
      const double y = -1.0 + (static_cast<double>(r) + 0.5) / 64.0;
      if (x * x + y * y <= 1.0) {
        pts.push_back(x);
        pts.push_back(y);
        for (std::size_t j = 2; j < d; ++j) pts.push_back(0.0);
      }
    }
  const auto f = predict(model, pts, d);
  for (std::size_t j = 0; j < d; ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "f\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out += io::format_double(pts[i * d + j]) + ",";
    out += io::format_double(f[i]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

Artifacts cmd_generate(Context& c) {
  const auto target = make_target(c);
  const Dataset data = make_dataset(target, c.s.n, c.s.sigma, c.s.seed, make_design(c, target.dim()));
  Artifacts a;
  a.add(c.path(".csv"), io::dataset_csv(data));
  Json meta = io::dataset_metadata(data, target);
  meta["config"] = c.config;
  a.add(c.path(".json"), io::dump(meta));
  a.result = {{"n", data.size()}, {"d", data.d}};
  return a;
}

Artifacts cmd_fit(Context& c) {
  const Dataset data = io::parse_dataset_csv(io::read_text(c.s.data));
  EstimatorSpec spec;
  spec.kind = parse_estimator(c.s.estimator);
  spec.train = make_train(c, spec.train);
  if (!(c.s.lambda >= 0.0)) throw ConfigError("field 'lambda': must be nonnegative");
  Artifacts a;
  FittedModel model;
  if (spec.kind == EstimatorKind::ReluNet) {
    TrainConfig cfg = spec.train;
    cfg.lambda = c.s.lambda;
    if (cfg.width == 0) cfg.width = data.size();
    if (cfg.step_size <= 0.0) cfg.step_size = suggested_step_size(data);
    auto res = train(data, cfg);
    a.result = {{"final_objective", res.report.final_objective},
                {"iterations", res.report.iterations},
                {"best_restart", res.report.best_restart},
                {"restart_objectives", res.report.restart_objectives},
                {"width", res.params.width()},
                {"path_norm", path_norm(res.params)}};
    model = std::move(res.params);
  } else if (spec.kind == EstimatorKind::TrendFilter) {
    auto res = fit_trend(data, c.s.lambda);
    a.result = {{"objective", res.diagnostics.objective},
                {"kkt_residual", res.diagnostics.kkt_residual},
                {"sweeps", res.diagnostics.sweeps},
                {"converged", res.diagnostics.converged},
                {"active_knots", res.model.active_knots()},
                {"tv2", tv2(res.model)}};
    model = std::move(res.model);
  } else {
    model = fit_estimator(spec, data, c.s.lambda);
  }
  const auto fitted = predict(model, data.points, data.d);
  double rss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) rss += (data.y[i] - fitted[i]) * (data.y[i] - fitted[i]);
  a.result["residual_sum_of_squares"] = rss;
  a.add(c.path(".model.json"), io::dump(io::model_to_json(model)));
  a.add(c.path(".curve.csv"), curve_csv(model));
  return a;
}

Artifacts cmd_evaluate(Context& c) {
  const auto target = make_target(c);
  const FittedModel model = io::model_from_json(Json::parse(io::read_text(c.s.model)));
  if (model_dim(model) != target.dim()) throw ConfigError("model and target differ in dimension");
  const std::size_t m = c.s.eval_points > 0 ? c.s.eval_points : default_eval_points(target.dim());
  const EvalGrid grid = EvalGrid::standard(target.dim(), m, derive_seed(c.s.seed, 0));
  Artifacts a;
  a.result["grid_mse"] = empirical_mse(model, target, grid);
  a.result["grid_points"] = m;
  if (!c.s.data.empty()) {
    const Dataset data = io::parse_dataset_csv(io::read_text(c.s.data));
    a.result["design_mse"] = empirical_mse(model, target, data);
  }
  Json doc = a.result;
  doc["config"] = c.config;
  a.add(c.path(".json"), io::dump(doc));
  return a;
}

LambdaRule make_rule(const Context& c, EstimatorKind kind) {
  LambdaRule rule;
  const auto& s = c.s;
  if (s.rule == "oracle") rule.kind = LambdaRule::Kind::Oracle;
  else if (s.rule == "holdout") rule.kind = LambdaRule::Kind::HoldOut;
  else if (s.rule == "fixed") rule.kind = LambdaRule::Kind::Fixed;
  else throw ConfigError("field 'rule': expected oracle, holdout or fixed");
  rule.value = s.lambda;
  rule.holdout_fraction = s.holdout_fraction;
  rule.grid = default_lambda_grid(kind);
  if (c.has("lambda_lo")) rule.grid.lo = s.lambda_lo;
  if (c.has("lambda_hi")) rule.grid.hi = s.lambda_hi;
  if (c.has("lambda_count")) rule.grid.count = s.lambda_count;
  if (c.has("lambda_scale")) {
    if (s.lambda_scale == "absolute") rule.grid.scale = LambdaGrid::Scale::Absolute;
    else if (s.lambda_scale == "n") rule.grid.scale = LambdaGrid::Scale::TimesN;
    else if (s.lambda_scale == "sqrt_n") rule.grid.scale = LambdaGrid::Scale::TimesSqrtN;
    else throw ConfigError("field 'lambda_scale': expected absolute, n or sqrt_n");
  }
  return rule;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

Artifacts cmd_rate_study(Context& c) {
  const auto target = make_target(c);
  const std::size_t d = target.dim();
  std::string csv;
  std::string timing;
  Json per_estimator = Json::object();
  std::vector<svg::Series> series;
  std::vector<RateResult> results;
  for (std::size_t e = 0; e < c.s.estimators.size(); ++e) {
    const EstimatorKind kind = parse_estimator(c.s.estimators[e]);
    ExperimentSpec spec;
    spec.target = target;
    spec.estimator.kind = kind;
    spec.estimator.train = make_train(c, spec.estimator.train);
    spec.sizes = c.s.sizes;
    spec.sigma = c.s.sigma;
    spec.trials = c.s.trials;
    spec.rule = make_rule(c, kind);
    spec.eval_points = c.s.eval_points > 0 ? c.s.eval_points : default_eval_points(d);
    spec.design = make_design(c, d);
    spec.seed = c.s.seed;
    spec.threads = resolve_threads(c.s.threads);
    try {
      spec.validate();
    } catch (const DomainError& err) {
      throw ConfigError(err.what());
    }
    RateResult r = rate_study(spec);
    const std::string name(estimator_name(kind));
    std::string rows = io::rate_csv(r, name);
    csv += e == 0 ? rows : rows.substr(rows.find('\n') + 1);
    std::string trows = io::timing_csv(r, name);
    timing += e == 0 ? trows : trows.substr(trows.find('\n') + 1);
    per_estimator[name] = io::rate_summary(r);
    svg::Series sr{name, {}, {}, kPalette[e % 4]};
    for (std::size_t i = 0; i < r.sizes.size(); ++i)
      if (r.mse_mean[i] > 0.0) {
        sr.x.push_back(static_cast<double>(r.sizes[i]));
        sr.y.push_back(r.mse_mean[i]);
      }
    series.push_back(sr);
    results.push_back(std::move(r));
  }
  const double dd = static_cast<double>(d);
  const double nonlinear = -(dd + 3.0) / (2.0 * dd + 3.0);
  const double linear = -3.0 / (dd + 3.0);
  Json refs{{"nonlinear_minimax", nonlinear}, {"linear_minimax", linear}};
  // reference lines anchored at the first estimator's smallest size
  if (!series.empty() && !series[0].x.empty()) {
    const double n0 = series[0].x.front();
    const double m0 = series[0].y.front();
    const double n1 = series[0].x.back();
    series.push_back({"N^" + io::format_double(nonlinear).substr(0, 6), {n0, n1}, {m0, m0 * std::pow(n1 / n0, nonlinear)}, "#555555", false, true});
    series.push_back({"N^" + io::format_double(linear).substr(0, 6), {n0, n1}, {m0, m0 * std::pow(n1 / n0, linear)}, "#aaaaaa", false, true});
  }
  svg::Document doc(640, 440);
  doc.line_panel({0, 0, 640, 440}, {"population MSE vs N", "N", "MSE", true, true}, series);

  Artifacts a;
  a.add(c.path(".csv"), csv);
  if (c.s.timing) a.add(c.path(".timing.csv"), timing);
  Json summary{{"preset", c.s.preset}, {"reference_slopes", refs}, {"estimators", per_estimator}, {"config", c.config}};
  a.add(c.path(".json"), io::dump(summary));
  a.add(c.path(".svg"), doc.str());
  for (auto& [name, v] : per_estimator.items())
    a.result[name] = {{"slope", v["slope"]}, {"slope_halfwidth", v["slope_halfwidth"]}};
  a.result["reference_slopes"] = refs;
  return a;
}

Artifacts cmd_approx_study(Context& c) {
  const auto target = make_target(c);
  TrainConfig base = make_train(c, TrainConfig{});
  ApproxOptions opt;
  opt.samples = c.s.samples;
  opt.seed = c.s.seed;
  const ApproxResult r = approximation_study(target, c.s.widths, base, opt);
  const double d = static_cast<double>(target.dim());
  const double reference = -(d + 3.0) / (2.0 * d);
  std::string csv = "width,sup_error,neurons\n";
  svg::Series s{"sup error", {}, {}, kPalette[0]};
  for (std::size_t i = 0; i < r.rate.sizes.size(); ++i) {
    csv += std::to_string(r.rate.sizes[i]) + "," + io::format_double(r.rate.mse_mean[i]) + "," +
           std::to_string(r.models[i].width()) + "\n";
    if (r.rate.mse_mean[i] > 0.0) {
      s.x.push_back(static_cast<double>(r.rate.sizes[i]));
      s.y.push_back(r.rate.mse_mean[i]);
    }
  }
  std::vector<svg::Series> series{s};
  if (!s.x.empty())
    series.push_back({"K^" + io::format_double(reference).substr(0, 5), {s.x.front(), s.x.back()},
                      {s.y.front(), s.y.front() * std::pow(s.x.back() / s.x.front(), reference)}, "#555555", false, true});
  svg::Document doc(640, 440);
  doc.line_panel({0, 0, 640, 440}, {"sup-norm error vs width", "K", "sup error", true, true}, series);
  Json summary{{"widths", r.rate.sizes},
               {"sup_error", r.rate.mse_mean},
               {"slope", r.rate.slope},
               {"slope_halfwidth", r.rate.slope_halfwidth},
               {"reference_slope", reference},
               {"config", c.config}};
  Artifacts a;
  a.add(c.path(".csv"), csv);
  a.add(c.path(".json"), io::dump(summary));
  a.add(c.path(".svg"), doc.str());
  a.result = {{"slope", r.rate.slope}, {"slope_halfwidth", r.rate.slope_halfwidth}, {"reference_slope", reference}};
  return a;
}

Artifacts reproduce_fig1(Context& c) {
  const std::size_t n = c.has("n") ? c.s.n : 256;
  const double sigma = c.has("sigma") ? c.s.sigma : 0.25;
  const auto target = TargetFunction::inhomogeneous_1d();
  const Dataset data = make_dataset(target, n, sigma, c.s.seed, Design::fixed());
  const EvalGrid grid = EvalGrid::equispaced(4096);

  EstimatorSpec css{EstimatorKind::Css, {}, {}};
  EstimatorSpec tf{EstimatorKind::TrendFilter, {}, {}};
  LambdaRule css_rule;
  css_rule.grid = default_lambda_grid(EstimatorKind::Css);
  LambdaRule tf_rule;
  tf_rule.grid = default_lambda_grid(EstimatorKind::TrendFilter);
  const Selection css_sel = select_lambda(css, data, &target, css_rule, &grid, 0);
  const Selection tf_sel = select_lambda(tf, data, &target, tf_rule, &grid, 0);
  const double large = 30.0 * css_sel.lambda;
  const double small = css_sel.lambda / 30.0;
  const FittedModel over = fit_css(data, large);
  const FittedModel under = fit_css(data, small);
  const auto& spline = std::get<SplineModel>(tf_sel.model);

  const auto xs = linspace(-1.0, 1.0, 1001);
  std::vector<double> truth(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) truth[i] = target(std::span<const double>(&xs[i], 1));
  const auto f_over = predict(over, xs, 1);
  const auto f_under = predict(under, xs, 1);
  const auto f_tf = predict(tf_sel.model, xs, 1);
  std::string csv = "x,truth,css_large_lambda,css_small_lambda,trend\n";
  for (std::size_t i = 0; i < xs.size(); ++i) csv += csv_row({xs[i], truth[i], f_over[i], f_under[i], f_tf[i]});

  // linear splines are drawn exactly through their nodes
  const auto& prof = std::get<Inhomogeneous1DParams>(target.params()).profile;
  std::vector<double> kx{-1.0};
  for (double t : spline.knots) kx.push_back(t);
  kx.push_back(1.0);
  const auto ky = eval_spline(spline, kx);

  double ylo = *std::min_element(data.y.begin(), data.y.end());
  double yhi = *std::max_element(data.y.begin(), data.y.end());
  const svg::Range range{-1.0, 1.0, ylo - 0.05 * (yhi - ylo), yhi + 0.05 * (yhi - ylo)};
  const svg::Series truth_line{"truth", prof.knots, prof.values, "#555555", false, true};
  const svg::Series samples{"data", data.points, data.y, "#2ca02c", true};
  svg::Document doc(880, 640);
  doc.line_panel({0, 0, 440, 320}, {"(a) target and samples", "x", "y"}, {truth_line, samples}, &range);
  doc.line_panel({440, 0, 440, 320}, {"(b) cubic smoothing spline, 30 x oracle lambda", "x", "y"},
                 {truth_line, {"css", xs, f_over, kPalette[1]}}, &range);
  doc.line_panel({0, 320, 440, 320}, {"(c) cubic smoothing spline, oracle lambda / 30", "x", "y"},
                 {truth_line, {"css", xs, f_under, kPalette[1]}}, &range);
  doc.line_panel({440, 320, 440, 320}, {"(d) locally adaptive linear spline, oracle lambda", "x", "y"},
                 {truth_line, {"adaptive spline", kx, ky, kPalette[0]}}, &range);

  Json doc_json{{"figure", "fig1"},
                {"n", n},
                {"sigma", sigma},
                {"seed", c.s.seed},
                {"lambda", {{"css_oracle", css_sel.lambda}, {"css_large", large}, {"css_small", small}, {"trend", tf_sel.lambda}}},
                {"mse",
                 {{"css_oracle", empirical_mse(css_sel.model, target, grid)},
                  {"css_large", empirical_mse(over, target, grid)},
                  {"css_small", empirical_mse(under, target, grid)},
                  {"trend", empirical_mse(tf_sel.model, target, grid)}}},
                {"trend_model", io::model_to_json(spline)},
                {"trend_nodes_x", kx},
                {"trend_nodes_y", ky},
                {"config", c.config}};
  Artifacts a;
  a.add(c.path(".csv"), csv);
  a.add(c.path(".json"), io::dump(doc_json));
  a.add(c.path(".svg"), doc.str());
  a.result = {{"mse", doc_json["mse"]}, {"lambda", doc_json["lambda"]}};
  return a;
}

Artifacts reproduce_2d(Context& c, bool ridge) {
  const std::size_t n = c.has("n") ? c.s.n : 500;
  const double sigma = c.has("sigma") ? c.s.sigma : 0.1;
  const auto target = ridge ? TargetFunction::triangle_ridge_2d(c.s.ridge_angle, c.s.ridge_period, c.s.ridge_amplitude)
                            : TargetFunction::gaussian_mix_2d();
  const Dataset data = make_dataset(target, n, sigma, c.s.seed, Design::uniform_ball());
  const EvalGrid grid = EvalGrid::monte_carlo(2, 10000, derive_seed(c.s.seed, 0));

  EstimatorSpec tps{EstimatorKind::Tps, {}, {}};
  LambdaRule rule;
  rule.grid = default_lambda_grid(EstimatorKind::Tps);
  const Selection tps_sel = select_lambda(tps, data, &target, rule, &grid, 0);
  TrainConfig cfg = make_train(c, relu_2d_config(data));
  if (c.has("lambda")) cfg.lambda = c.s.lambda;
  if (cfg.width == 0) cfg.width = data.size();
  if (cfg.step_size <= 0.0) cfg.step_size = suggested_step_size(data);
  const auto net = train(data, cfg);
  const FittedModel relu = net.params;

  constexpr std::size_t kCells = 128;
  std::vector<double> pts;
  std::vector<std::size_t> cell;
  for (std::size_t r = 0; r < kCells; ++r)
    for (std::size_t q = 0; q < kCells; ++q) {
      const double x = -1.0 + (static_cast<double>(q) + 0.5) * 2.0 / kCells;
      const double y = -1.0 + (static_cast<double>(r) + 0.5) * 2.0 / kCells;
      if (x * x + y * y <= 1.0) {
        pts.push_back(x);
        pts.push_back(y);
        cell.push_back(r * kCells + q);
      }
    }
  const std::size_t m = cell.size();
  std::vector<double> truth(m);
  for (std::size_t i = 0; i < m; ++i) truth[i] = target(std::span<const double>(pts).subspan(2 * i, 2));
  const auto f_tps = predict(tps_sel.model, pts, 2);
  const auto f_relu = predict(relu, pts, 2);
  std::string csv = "x1,x2,truth,tps,relu\n";
  for (std::size_t i = 0; i < m; ++i) csv += csv_row({pts[2 * i], pts[2 * i + 1], truth[i], f_tps[i], f_relu[i]});

  const double vmin = *std::min_element(truth.begin(), truth.end());
  const double vmax = *std::max_element(truth.begin(), truth.end());
  auto heat = [&](const std::vector<double>& v) {
    svg::Heatmap h;
    h.nx = h.ny = kCells;
    h.values.assign(kCells * kCells, std::nan(""));
    for (std::size_t i = 0; i < m; ++i) h.values[cell[i]] = v[i];
    h.vmin = vmin;
    h.vmax = vmax;
    return h;
  };
  svg::Document doc(1080, 400);
  doc.heatmap_panel({0, 0, 360, 400}, "(a) target and samples", heat(truth), data.points);
  doc.heatmap_panel({360, 0, 360, 400}, "(b) thin-plate spline, oracle lambda", heat(f_tps));
  doc.heatmap_panel({720, 0, 360, 400}, "(c) ReLU network, weight decay", heat(f_relu));

  Json doc_json{{"figure", ridge ? "fig3" : "fig2"},
                {"n", n},
                {"sigma", sigma},
                {"seed", c.s.seed},
                {"target", io::target_to_json(target)},
                {"tps_lambda", tps_sel.lambda},
                {"relu_lambda", cfg.lambda},
                {"relu_width", std::get<NetworkParams>(relu).width()},
                {"relu_objective", net.report.final_objective},
                {"mse", {{"tps", empirical_mse(tps_sel.model, target, grid)}, {"relu", empirical_mse(relu, target, grid)}}},
                {"config", c.config}};
  Artifacts a;
  a.add(c.path(".csv"), csv);
  a.add(c.path(".json"), io::dump(doc_json));
  a.add(c.path(".svg"), doc.str());
  a.result = {{"mse", doc_json["mse"]}, {"tps_lambda", tps_sel.lambda}};
  return a;
}

Artifacts cmd_reproduce(Context& c) {
  if (c.s.figure == "fig1") return reproduce_fig1(c);
  if (c.s.figure == "fig2") return reproduce_2d(c, false);
  if (c.s.figure == "fig3") return reproduce_2d(c, true);
  throw ConfigError("field 'figure': expected fig1, fig2 or fig3");
}

void apply_preset(Context& c) {
  if (c.s.preset.empty()) return;
  if (c.s.preset != "1d-gap") throw ConfigError("field 'preset': unknown preset '" + c.s.preset + "'");
  auto set = [&](const char* name, auto&& fn) {
    if (!c.has(name)) fn();
  };
  set("target", [&] { c.s.target = "inhom1d"; });
  set("sizes", [&] { c.s.sizes = {64, 128, 256, 512, 1024, 2048, 4096}; });
  set("trials", [&] { c.s.trials = 20; });
  set("sigma", [&] { c.s.sigma = 0.25; });
  set("design", [&] { c.s.design = "fixed"; });
  set("rule", [&] { c.s.rule = "oracle"; });
  set("estimators", [&] { c.s.estimators = {"trend", "css"}; });
  set("eval_points", [&] { c.s.eval_points = 4096; });
}

void check_paths(const Context& c) {
  auto must_read = [](const std::string& field, const std::string& p) {
    if (p.empty()) throw ConfigError("field '" + field + "' is required");
    if (!fs::is_regular_file(p)) throw ConfigError("field '" + field + "': no such file: " + p);
  };
  if (c.command == "fit") must_read("data", c.s.data);
  if (c.command == "evaluate") {
    must_read("model", c.s.model);
    if (!c.s.data.empty()) must_read("data", c.s.data);
  }
  const fs::path out(c.s.out);
  if (out.filename().empty()) throw ConfigError("field 'out': needs a file name prefix");
  const fs::path parent = out.parent_path().empty() ? fs::path(".") : out.parent_path();
  if (!fs::is_directory(parent)) throw ConfigError("field 'out': directory does not exist: " + parent.string());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context c;
  CLI::App app{"adaptix: shallow ReLU networks, adaptive splines and linear smoothers"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  std::vector<Field> table = fields(c.s);
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  for (const auto& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd, kAbout.at(cmd));
    sub->add_option("--config", c.s.config, "JSON config file; flags override its values");
    for (const auto& f : table) {
      if (!allowed(f, cmd)) continue;
      CLI::Option* opt = std::visit(
          [&](auto* p) -> CLI::Option* {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, bool>) {
              return sub->add_flag(flag_name(f.name), *p, f.help);
            } else if constexpr (std::is_same_v<T, std::vector<std::size_t>> ||
                                 std::is_same_v<T, std::vector<std::string>>) {
              return sub->add_option(flag_name(f.name), *p, f.help)->delimiter(',');
            } else {
              return sub->add_option(flag_name(f.name), *p, f.help);
            }
          },
          f.slot);
      options[cmd][f.name] = opt;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  c.command = app.get_subcommands().front()->get_name();
  for (const auto& [name, opt] : options[c.command])
    if (opt->count() > 0) c.given.insert(name);

  try {
    if (!c.s.config.empty()) {
      Json cfg;
      try {
        cfg = Json::parse(io::read_text(c.s.config));
      } catch (const Json::parse_error& e) {
        throw ConfigError("config " + c.s.config + ": " + e.what());
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      if (!cfg.is_object()) throw ConfigError("config " + c.s.config + ": top level must be an object");
      for (const auto& [key, value] : cfg.items()) {
        if (key == "command") {
          if (value != c.command) throw ConfigError("config field 'command' does not match '" + c.command + "'");
          continue;
        }
        auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.name == key; });
        if (it == table.end() || !allowed(*it, c.command))
          throw ConfigError("config " + c.s.config + ": unknown field '" + key + "' for command " + c.command);
        if (c.given.count(key)) continue;  // flag wins
        assign_from_json(*it, value);
        c.given.insert(key);
      }
    }
    if (c.s.out.empty()) c.s.out = "adaptix-" + c.command;
    if (c.command == "rate-study") apply_preset(c);
    if (c.command == "approx-study" && !c.has("target")) c.s.target = "ridge2d";
    c.config = Json::object();
    c.config["command"] = c.command;
    for (const auto& f : table)
      if (allowed(f, c.command) && f.name != "threads" && f.name != "out") c.config[f.name] = slot_json(f.slot);
    check_paths(c);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  Artifacts art;
  try {
    if (c.command == "generate") art = cmd_generate(c);
    else if (c.command == "fit") art = cmd_fit(c);
    else if (c.command == "evaluate") art = cmd_evaluate(c);
    else if (c.command == "rate-study") art = cmd_rate_study(c);
    else if (c.command == "approx-study") art = cmd_approx_study(c);
    else art = cmd_reproduce(c);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }

  Json run_doc{{"command", c.command}, {"config", c.config}, {"result", art.result}, {"artifacts", Json::array()}};
  for (const auto& [p, _] : art.files) run_doc["artifacts"].push_back(p.filename().string());
  art.add(c.path(".run.json"), io::dump(run_doc));
  try {
    for (const auto& [p, text] : art.files) io::write_text(p, text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  out << art.result.dump(2) << "\n";
  return kOk;
}

}  // namespace adaptix::cli
