// Acceptance run: one PASS/FAIL line per criterion. Usage: adaptix_acceptance [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "adaptix/experiments.hpp"
#include "adaptix/io.hpp"
#include "adaptix/parallel.hpp"
#include "adaptix/rng.hpp"

using namespace adaptix;
namespace fs = std::filesystem;

#ifndef ADAPTIX_CLI_PATH
#error "ADAPTIX_CLI_PATH must point at the adaptix executable"
#endif

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

NetworkParams random_net(Rng& rng, std::size_t d, std::size_t k) {
  NetworkParams net = NetworkParams::affine(d);
  for (auto& c : net.c) c = rng.normal();
  net.c0 = rng.normal();
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> w(d);
    for (auto& x : w) x = rng.normal() * std::exp(rng.uniform(-1.5, 1.5));
    net.add_neuron(rng.normal() * std::exp(rng.uniform(-1.5, 1.5)), w, rng.uniform(-1, 1));
  }
  return net;
}

// 1: weight decay >= lambda * path norm, equality after balance, forward invariant
Verdict path_norm_identity() {
  Rng rng(1001);
  const std::size_t dims[3] = {1, 2, 5};
  double worst_gap = 0.0, worst_eq = 0.0, worst_fwd = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = dims[t % 3];
    const auto net = random_net(rng, d, 1 + rng.next_u64() % 32);
    const double lam = std::exp(rng.uniform(-3, 3));
    const double wd = lam * weight_decay_norm(net);
    const double pn = lam * path_norm(net);
    worst_gap = std::min(worst_gap, wd - pn);
    const auto bal = balance(net);
    worst_eq = std::max(worst_eq, std::abs(lam * weight_decay_norm(bal) - pn) / std::max(1.0, pn));
    const auto pts = uniform_ball_points(d, 64, rng.next_u64());
    const auto f0 = forward_batch(net, pts);
    const auto f1 = forward_batch(bal, pts);
    for (std::size_t i = 0; i < f0.size(); ++i)
      worst_fwd = std::max(worst_fwd, std::abs(f0[i] - f1[i]) / std::max(1.0, std::abs(f0[i])));
  }
  const bool pass = worst_gap >= -1e-12 && worst_eq <= 1e-10 && worst_fwd <= 1e-12;
  return {pass, "min(WD - lambda PN) = " + fmt("%.2e", worst_gap) + ", balance equality err " + fmt("%.2e", worst_eq) +
                    " (tol 1e-10), forward err " + fmt("%.2e", worst_fwd) + " (tol 1e-12)"};
}

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

// 2: analytic vs central finite differences, 100 draws away from kinks
Verdict gradient_check() {
  Rng rng(2002);
  double worst = 0.0;
  int draws = 0;
  while (draws < 100) {
    const std::size_t d = 1 + rng.next_u64() % 4;
    auto net = random_net(rng, d, 1 + rng.next_u64() % 8);
    const std::size_t n = 10 + rng.next_u64() % 20;
    std::vector<double> y(n);
    for (auto& v : y) v = rng.normal();
    const auto data = make_dataset(d, uniform_ball_points(d, n, rng.next_u64()), y);
    bool near_kink = false;
    for (std::size_t k = 0; k < net.width() && !near_kink; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        double z = -net.b[k];
        for (std::size_t j = 0; j < d; ++j) z += net.inner(k)[j] * data.point(i)[j];
        if (std::abs(z) <= 1e-3) near_kink = true;
      }
    if (near_kink) continue;
    ++draws;
    const auto kind = draws % 2 ? ObjectiveKind::WeightDecay : ObjectiveKind::PathNorm;
    const double lam = std::exp(rng.uniform(-3, 1));
    const auto g = flat(gradient(net, data, lam, kind));
    auto x = flat(net);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double x0 = x[i];
      NetworkParams p = net;
      x[i] = x0 + 1e-6;
      set_flat(p, x);
      const double fp = objective(p, data, lam, kind);
      x[i] = x0 - 1e-6;
      set_flat(p, x);
      const double fm = objective(p, data, lam, kind);
      x[i] = x0;
      const double fd = (fp - fm) / 2e-6;
      worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
    }
  }
  return {worst < 1e-5, "max relative error " + fmt("%.2e", worst) + " over 100 draws (tol 1e-5, |.| floored at 1)"};
}

// 3: representer equivalence in 1D
Verdict representer() {
  const auto target = TargetFunction::inhomogeneous_1d();
  double worst_emb = 0.0;
  std::size_t most_knots = 0;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = make_dataset(target, 50, 0.25, seed, Design::fixed());
    const auto tf = fit_trend(data, 1.0);
    const double opt = trend_objective(tf.model, data, 1.0);
    const double emb = objective(embed_as_network(tf.model), data, 1.0, ObjectiveKind::PathNorm);
    worst_emb = std::max(worst_emb, std::abs(emb - opt) / opt);
    most_knots = std::max(most_knots, tf.model.active_knots());
    TrainConfig cfg;
    cfg.width = 64;
    cfg.lambda = 1.0;
    cfg.restarts = 10;
    cfg.seed = seed;
    cfg.step_size = suggested_step_size(data);
    const auto net = train(data, cfg);
    ratios.push_back(net.report.final_objective / opt);
  }
  const double med = median(ratios);
  const bool pass = worst_emb <= 1e-8 && med <= 1.05 && most_knots <= 48;
  return {pass, "(a) embed rel err " + fmt("%.2e", worst_emb) + " (tol 1e-8); (b) median train/optimum " +
                    fmt("%.5f", med) + " (tol 1.05); (c) max active knots " + std::to_string(most_knots) + " (<= 48)"};
}

// 4: rate gap between the adaptive spline and the cubic smoothing spline
Verdict rate_gap() {
  RateResult res[2];
  const EstimatorKind kinds[2] = {EstimatorKind::TrendFilter, EstimatorKind::Css};
  for (int e = 0; e < 2; ++e) {
    ExperimentSpec spec;
    spec.target = TargetFunction::inhomogeneous_1d();
    spec.estimator.kind = kinds[e];
    spec.sizes = {64, 128, 256, 512, 1024, 2048, 4096};
    spec.trials = 20;
    spec.sigma = 0.25;
    spec.design = Design::fixed();
    spec.rule.kind = LambdaRule::Kind::Oracle;
    spec.rule.grid = default_lambda_grid(kinds[e]);
    spec.eval_points = 4096;
    spec.seed = 0;
    spec.threads = resolve_threads(0);
    res[e] = rate_study(spec);
  }
  const double slope = res[0].slope;
  const double tf = res[0].mse_mean.back(), css = res[1].mse_mean.back();
  const bool pass = slope >= -0.95 && slope <= -0.65 && tf < css && res[0].excluded_sizes.empty();
  return {pass, "trend slope " + fmt("%.3f", slope) + " +- " + fmt("%.3f", res[0].slope_halfwidth) +
                    " (in [-0.95, -0.65]); css slope " + fmt("%.3f", res[1].slope) + "; MSE at N=4096 trend " +
                    fmt("%.5f", tf) + " < css " + fmt("%.5f", css)};
}

// 5: 2D comparison of the ReLU network with the thin-plate spline
Verdict figure_2d() {
  std::string detail;
  bool pass = true;
  struct Case {
    const char* name;
    TargetFunction target;
    double factor;
  };
  const Case cases[2] = {{"ridge", TargetFunction::triangle_ridge_2d(), 0.6},
                         {"gauss", TargetFunction::gaussian_mix_2d(), 1.5}};
  for (const auto& c : cases) {
    std::vector<double> relu, tps;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto data = make_dataset(c.target, 500, 0.1, seed, Design::uniform_ball());
      const auto grid = EvalGrid::monte_carlo(2, 10000, derive_seed(seed, 0));
      LambdaRule rule;
      rule.grid = default_lambda_grid(EstimatorKind::Tps);
      const auto sel = select_lambda({EstimatorKind::Tps, {}, {}}, data, &c.target, rule, &grid, 0);
      tps.push_back(sel.scores.empty() ? 0.0 : empirical_mse(sel.model, c.target, grid));
      TrainConfig cfg = relu_2d_config(data);
      cfg.seed = seed;
      relu.push_back(empirical_mse(train(data, cfg).params, c.target, grid));
    }
    const double r = median(relu), t = median(tps);
    const bool ok = r <= c.factor * t;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += std::string(c.name) + ": median relu " + fmt("%.5f", r) + " vs " + fmt("%.2f", c.factor) + " x tps " +
              fmt("%.5f", t) + " (ratio " + fmt("%.3f", r / t) + ")";
  }
  return {pass, detail};
}

// 6: sup-norm approximation error against width
Verdict k_sweep() {
  const auto target = TargetFunction::triangle_ridge_2d();
  TrainConfig base;
  base.step_size = 0.0;
  const std::vector<std::size_t> widths{8, 16, 32, 64, 128};
  const auto r = approximation_study(target, widths, base);
  bool monotone = true;
  for (std::size_t i = 1; i < r.rate.mse_mean.size(); ++i) monotone = monotone && r.rate.mse_mean[i] <= r.rate.mse_mean[i - 1];
  std::string errs;
  for (double e : r.rate.mse_mean) errs += (errs.empty() ? "" : ", ") + fmt("%.4f", e);
  const bool pass = monotone && r.rate.slope <= -0.5;
  return {pass, "sup errors [" + errs + "], non-increasing " + (monotone ? std::string("yes") : std::string("no")) +
                    ", slope " + fmt("%.3f", r.rate.slope) + " +- " + fmt("%.3f", r.rate.slope_halfwidth) +
                    " (needs <= -0.5)"};
}

// 7: linear smoothers are linear, the adaptive spline is not
Verdict linearity() {
  const auto d1 = make_dataset(TargetFunction::inhomogeneous_1d(), 100, 0.0, 0, Design::fixed());
  const auto d2 = make_dataset(TargetFunction::gaussian_mix_2d(), 100, 0.0, 0, Design::uniform_ball());
  const auto css = linearity_probe({EstimatorKind::Css, {}, {}}, 1e-3, d1, 20, 7);
  const auto tps = linearity_probe({EstimatorKind::Tps, {}, {}}, 1e-4, d2, 20, 7);
  const auto w = trend_filter_witness(d1);
  const auto tf = linearity_check({EstimatorKind::TrendFilter, {}, {}}, w.lambda, d1, w.y1, w.y2, 1.0, 1.0);
  const double lin = std::max({css.superposition, css.homogeneity, css.additivity, tps.superposition, tps.homogeneity,
                               tps.additivity});
  return {lin <= 1e-8 && tf.additivity > 1e-3,
          "css/tps worst violation " + fmt("%.2e", lin) + " (tol 1e-8); trend additivity violation " +
              fmt("%.3e", tf.additivity) + " (> 1e-3)"};
}

// 8: solver oracles
Verdict solver_oracles() {
  const auto v = fit_trend(make_dataset(1, {-1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}), 0.0).model;
  const double v_err = v.knots.size() == 1 && v.knots[0] == 0.0
                           ? std::max({std::abs(v.beta0), std::abs(v.beta1 + 1.0), std::abs(v.coeffs[0] - 2.0)})
                           : INFINITY;
  auto x = linspace(-1, 1, 40);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 0.7 * x[i] - 0.2;
  const auto aff = make_dataset(1, x, y);
  double css_err = 0.0;
  for (double lam : {0.0, 1e-6, 1e-2, 1.0, 1e3, 1e8}) {
    const auto m = fit_css(aff, lam);
    for (std::size_t i = 0; i < y.size(); ++i) css_err = std::max(css_err, std::abs(m.fitted[i] - y[i]));
  }
  const auto pts = uniform_ball_points(2, 50, 8);
  std::vector<double> py(50);
  for (std::size_t i = 0; i < 50; ++i) py[i] = 1.0 + 0.5 * pts[2 * i] - 2.0 * pts[2 * i + 1];
  const auto plane = make_dataset(2, pts, py);
  double tps_err = 0.0;
  for (double lam : {0.0, 1e-4, 1.0}) {
    const auto m = fit_tps(plane, lam);
    for (double a : m.a) tps_err = std::max(tps_err, std::abs(a));
  }
  return {v_err <= 1e-8 && css_err <= 1e-8 && tps_err <= 1e-8,
          "V fit err " + fmt("%.2e", v_err) + ", css affine residual " + fmt("%.2e", css_err) + ", tps planar |a| " +
              fmt("%.2e", tps_err) + " (tol 1e-8)"};
}

// 9: every CLI command twice with identical arguments, byte-identical CSV/JSON
Verdict cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("adaptix_accept_" + std::to_string(::getpid()));
  const fs::path run = dir / "run";
  const fs::path first = dir / "first";
  fs::remove_all(dir);
  fs::create_directories(run);
  const std::string cli = ADAPTIX_CLI_PATH;
  const std::string out = run.string();
  const std::string data_csv = out + "/input.csv";
  const std::vector<std::string> commands{
      "generate --n 200 --seed 4 --out " + out + "/input",
      "generate --target gauss2d --n 300 --sigma 0.1 --seed 7 --out " + out + "/gen",
      "fit --data " + data_csv + " --estimator trend --lambda 0.2 --out " + out + "/fit_trend",
      "fit --data " + data_csv + " --estimator css --lambda 1e-4 --out " + out + "/fit_css",
      "fit --data " + data_csv + " --estimator relu --width 16 --lambda 0.05 --max-iters 3000 --restarts 2 --out " + out +
          "/fit_relu",
      "fit --data " + out + "/gen.csv --estimator tps --lambda 1e-5 --out " + out + "/fit_tps",
      "evaluate --model " + out + "/fit_trend.model.json --data " + data_csv + " --out " + out + "/eval",
      "rate-study --preset 1d-gap --sizes 64,128,256,512 --trials 4 --out " + out + "/rate",
      "rate-study --target gauss2d --estimators tps,relu --sizes 50,100,200 --trials 2 --max-iters 1000 --width 16 "
      "--out " + out + "/rate2d",
      "approx-study --widths 4,8,16 --max-iters 2000 --samples 512 --out " + out + "/approx",
      "reproduce --figure fig1 --out " + out + "/fig1",
      "reproduce --figure fig2 --max-iters 2000 --restarts 1 --out " + out + "/fig2",
      "reproduce --figure fig3 --max-iters 2000 --restarts 1 --out " + out + "/fig3",
  };
  std::string detail;
  bool pass = true;
  for (int round = 0; round < 2; ++round) {
    for (const auto& cmd : commands) {
      const int rc = std::system((cli + " " + cmd + " > /dev/null 2>&1").c_str());
      if (rc != 0) {
        pass = false;
        detail += "exit " + std::to_string(rc) + " for '" + cmd.substr(0, 40) + "'; ";
      }
    }
    if (round == 0) fs::copy(run, first, fs::copy_options::recursive);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(first)) {
    const auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".json") continue;
    ++compared;
    const fs::path again = run / entry.path().filename();
    if (!fs::exists(again) || io::read_text(entry.path()) != io::read_text(again)) {
      pass = false;
      detail += entry.path().filename().string() + " differs; ";
    }
  }
  fs::remove_all(dir);
  return {pass && compared >= 30, detail + std::to_string(compared) + " CSV/JSON artifacts from " +
                                      std::to_string(commands.size()) + " commands compared"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> all{
      {1, "path-norm identity and AM-GM", 10, path_norm_identity},
      {2, "gradient correctness", 30, gradient_check},
      {3, "1D representer equivalence", 120, representer},
      {4, "1D rate gap", 600, rate_gap},
      {5, "2D figure reproduction", 900, figure_2d},
      {6, "approximation K-sweep", 600, k_sweep},
      {7, "linearity dichotomy", 60, linearity},
      {8, "solver oracles", 1, solver_oracles},
      {9, "CLI determinism", 600, cli_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool ok = v.pass && in_time;
    failures += ok ? 0 : 1;
    std::printf("[%s] %d %s: %s; %.2f s (budget %.0f s)%s\n", ok ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                c.budget_seconds, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
