#include "adaptix/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "adaptix/error.hpp"

namespace adaptix::io {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

std::vector<double> doubles(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("missing field '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

Json profile_json(const PiecewiseLinear& p) { return Json{{"knots", p.knots}, {"values", p.values}}; }

PiecewiseLinear profile_from(const Json& j) {
  PiecewiseLinear p{doubles(j, "knots"), doubles(j, "values")};
  if (p.knots.size() != p.values.size() || p.knots.size() < 2)
    throw Error("profile needs matching knots and values (at least two)");
  return p;
}

std::string design_name(const Design& d) { return d.kind == Design::Kind::Fixed ? "fixed" : "ball"; }

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.d; ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.point(i)) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(data.y[i]);
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("dataset CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "y") throw Error("dataset CSV line 1: header must be x1,...,xd,y");
  for (std::size_t j = 0; j + 1 < header.size(); ++j)
    if (header[j] != "x" + std::to_string(j + 1)) throw Error("dataset CSV line 1: unexpected column '" + header[j] + "'");
  Dataset data;
  data.d = header.size() - 1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty())
        throw Error("dataset CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != data.d + 1)
      throw Error("dataset CSV line " + std::to_string(lineno) + ": expected " + std::to_string(data.d + 1) + " fields");
    data.points.insert(data.points.end(), row.begin(), row.end() - 1);
    data.y.push_back(row.back());
  }
  data.validate();
  return data;
}

Json target_to_json(const TargetFunction& target) {
  Json j;
  j["kind"] = std::string(target_kind_name(target.kind()));
  j["dim"] = target.dim();
  std::visit(overloaded{[&](const Inhomogeneous1DParams& p) { j["profile"] = profile_json(p.profile); },
                        [&](const GaussianMix2DParams& p) {
                          Json bumps = Json::array();
                          for (const auto& b : p.bumps)
                            bumps.push_back({{"center", b.center}, {"scale", b.scale}, {"amplitude", b.amplitude}});
                          j["bumps"] = bumps;
                        },
                        [&](const TriangleRidge2DParams& p) {
                          j["direction"] = p.direction;
                          j["period"] = p.period;
                          j["amplitude"] = p.amplitude;
                        },
                        [&](const PureRidgeParams& p) {
                          j["direction"] = p.direction;
                          j["profile"] = profile_json(p.profile);
                        }},
             target.params());
  return j;
}

TargetFunction target_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "inhom1d") return TargetFunction::inhomogeneous_1d(profile_from(j.at("profile")));
  if (kind == "gauss2d") {
    std::vector<GaussianBump> bumps;
    for (const auto& b : j.at("bumps"))
      bumps.push_back({b.at("center").get<std::array<double, 2>>(), b.at("scale").get<double>(),
                       b.at("amplitude").get<double>()});
    return TargetFunction::gaussian_mix_2d(std::move(bumps));
  }
  if (kind == "ridge2d")
    return TargetFunction::triangle_ridge_2d(j.at("direction").get<std::array<double, 2>>(),
                                             j.at("period").get<double>(), j.at("amplitude").get<double>());
  if (kind == "pureridge") return TargetFunction::pure_ridge(doubles(j, "direction"), profile_from(j.at("profile")));
  throw Error("unknown target kind '" + kind + "'");
}

Json dataset_metadata(const Dataset& data, const TargetFunction& target) {
  Json j;
  j["target"] = target_to_json(target);
  j["n"] = data.size();
  j["d"] = data.d;
  j["sigma"] = data.sigma;
  j["seed"] = data.seed;
  Json design{{"kind", design_name(data.design)}};
  if (data.design.kind == Design::Kind::Fixed) {
    design["lo"] = data.design.lo;
    design["hi"] = data.design.hi;
  }
  j["design"] = design;
  return j;
}

Json model_to_json(const NetworkParams& net) {
  Json w = Json::array();
  for (std::size_t k = 0; k < net.width(); ++k) {
    const auto wk = net.inner(k);
    w.push_back(std::vector<double>(wk.begin(), wk.end()));
  }
  return Json{{"d", net.d}, {"K", net.width()}, {"v", net.v}, {"W", w},
              {"b", net.b}, {"c", net.c},       {"c0", net.c0}, {"reduced", net.reduced}};
}

Json model_to_json(const SplineModel& m) {
  return Json{{"beta0", m.beta0}, {"beta1", m.beta1}, {"knots", m.knots}, {"coeffs", m.coeffs}};
}

Json model_to_json(const CssModel& m) {
  return Json{{"knots", m.knots}, {"fitted", m.fitted}, {"second_derivs", m.second_derivs}, {"lambda", m.lambda}};
}

Json model_to_json(const TpsModel& m) {
  Json centers = Json::array();
  for (std::size_t i = 0; i < m.a.size(); ++i) centers.push_back({m.centers[2 * i], m.centers[2 * i + 1]});
  return Json{{"centers", centers}, {"a", m.a}, {"poly", m.poly}, {"lambda", m.lambda}};
}

Json model_to_json(const FittedModel& model) {
  return std::visit([](const auto& m) { return model_to_json(m); }, model);
}

FittedModel model_from_json(const Json& j) {
  if (!j.is_object()) throw Error("model JSON must be an object");
  if (j.contains("W")) {
    NetworkParams net = NetworkParams::affine(j.at("d").get<std::size_t>());
    net.c = doubles(j, "c");
    net.c0 = j.at("c0").get<double>();
    const auto v = doubles(j, "v");
    const auto b = doubles(j, "b");
    const auto& w = j.at("W");
    if (w.size() != v.size() || b.size() != v.size()) throw Error("network JSON: v, W and b differ in length");
    for (std::size_t k = 0; k < v.size(); ++k) net.add_neuron(v[k], w[k].get<std::vector<double>>(), b[k]);
    net.reduced = j.value("reduced", false);
    if (j.contains("K") && j.at("K").get<std::size_t>() != net.width()) throw Error("network JSON: K does not match v");
    net.validate();
    return net;
  }
  if (j.contains("beta0")) {
    SplineModel m{j.at("beta0").get<double>(), j.at("beta1").get<double>(), doubles(j, "knots"), doubles(j, "coeffs")};
    m.validate();
    return m;
  }
  if (j.contains("second_derivs")) {
    CssModel m{doubles(j, "knots"), doubles(j, "fitted"), doubles(j, "second_derivs"), j.at("lambda").get<double>()};
    m.validate();
    return m;
  }
  if (j.contains("centers")) {
    TpsModel m;
    for (const auto& c : j.at("centers")) {
      const auto p = c.get<std::array<double, 2>>();
      m.centers.push_back(p[0]);
      m.centers.push_back(p[1]);
    }
    m.a = doubles(j, "a");
    m.poly = j.at("poly").get<std::array<double, 3>>();
    m.lambda = j.at("lambda").get<double>();
    m.validate();
    return m;
  }
  throw Error("unrecognized model JSON");
}

std::string rate_csv(const RateResult& r, const std::string& estimator) {
  std::string out = "estimator,size,trial,seed,lambda,mse,ok\n";
  for (const auto& t : r.per_trial) {
    out += estimator + "," + std::to_string(t.size) + "," + std::to_string(t.trial) + "," + std::to_string(t.seed) +
           "," + format_double(t.lambda) + "," + format_double(t.mse) + "," + (t.ok ? "1" : "0") + "\n";
  }
  return out;
}

std::string timing_csv(const RateResult& r, const std::string& estimator) {
  std::string out = "estimator,size,trial,fit_seconds\n";
  for (const auto& t : r.per_trial)
    out += estimator + "," + std::to_string(t.size) + "," + std::to_string(t.trial) + "," + format_double(t.seconds) + "\n";
  return out;
}

Json rate_summary(const RateResult& r) {
  Json failures = Json::array();
  for (const auto& t : r.per_trial)
    if (!t.ok) failures.push_back({{"size", t.size}, {"trial", t.trial}, {"error", t.error}});
  return Json{{"sizes", r.sizes},
              {"mse_mean", r.mse_mean},
              {"mse_stderr", r.mse_stderr},
              {"slope", r.slope},
              {"slope_halfwidth", r.slope_halfwidth},
              {"intercept", r.intercept},
              {"excluded_sizes", r.excluded_sizes},
              {"failed_trials", failures}};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace adaptix::io
