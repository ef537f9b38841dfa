#include "adaptix/dataset.hpp"

#include <cmath>
#include <string>

#include "adaptix/error.hpp"
#include "adaptix/rng.hpp"

namespace adaptix {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  if (n == 1) {
    x[0] = 0.5 * (lo + hi);
    return x;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = lo + step * static_cast<double>(i);
  if (n > 1) x[n - 1] = hi;
  return x;
}

std::vector<double> uniform_ball_points(std::size_t d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> pts(n * d);
  for (std::size_t i = 0; i < n; ++i) rng.ball_point({pts.data() + i * d, d});
  return pts;
}

std::vector<double> Dataset::columns() const {
  const std::size_t n = size();
  std::vector<double> cols(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) cols[j * n + i] = points[i * d + j];
  return cols;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.d = d;
  out.sigma = sigma;
  out.seed = seed;
  out.design = design;
  out.points.reserve(rows.size() * d);
  out.y.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw DomainError("Dataset::subset: row out of range");
    const auto p = point(r);
    out.points.insert(out.points.end(), p.begin(), p.end());
    out.y.push_back(y[r]);
  }
  return out;
}

void Dataset::validate() const {
  if (d == 0) throw DimensionError("dataset dimension must be positive");
  if (points.size() != y.size() * d)
    throw DimensionError("dataset has " + std::to_string(points.size()) + " coordinates for " +
                         std::to_string(y.size()) + " responses in dimension " + std::to_string(d));
  for (std::size_t i = 0; i < size(); ++i) {
    double n2 = 0.0;
    for (double v : point(i)) n2 += v * v;
    if (!(std::sqrt(n2) <= 1.0 + 1e-12))
      throw DomainError("design point " + std::to_string(i) + " lies outside the unit ball");
  }
}

Dataset make_dataset(const TargetFunction& target, std::size_t n, double sigma, std::uint64_t seed,
                     Design design) {
  if (n == 0) throw DomainError("make_dataset: n must be positive");
  if (!(sigma >= 0.0)) throw DomainError("make_dataset: sigma must be nonnegative");
  Dataset data;
  data.d = target.dim();
  data.sigma = sigma;
  data.seed = seed;
  data.design = design;
  if (design.kind == Design::Kind::Fixed) {
    if (data.d != 1) throw DimensionError("fixed (equispaced) designs are 1D only");
    if (!(design.lo >= -1.0 && design.hi <= 1.0 && design.lo < design.hi))
      throw DomainError("fixed design interval must lie inside [-1, 1]");
    data.points = linspace(design.lo, design.hi, n);
  } else {
    data.points = uniform_ball_points(data.d, n, derive_seed(seed, 0));
  }
  Rng noise(derive_seed(seed, 1));
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = target(data.point(i));
    data.y[i] = sigma > 0.0 ? f + sigma * noise.normal() : f;
  }
  return data;
}

Dataset make_dataset(std::size_t d, std::vector<double> points, std::vector<double> y) {
  Dataset data;
  data.d = d;
  data.points = std::move(points);
  data.y = std::move(y);
  data.design = Design::uniform_ball();
  data.validate();
  return data;
}

}  // namespace adaptix
