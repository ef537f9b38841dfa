#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaptix/error.hpp"
#include "adaptix/smoothers.hpp"

namespace adaptix {

double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

namespace {
// phi as a function of the squared distance
double phi_sq(double r2) { return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0; }
double dist_sq(double ax, double ay, double bx, double by) {
  const double dx = ax - bx;
  const double dy = ay - by;
  return dx * dx + dy * dy;
}
}  // namespace

void TpsModel::validate() const {
  if (centers.size() != 2 * a.size()) throw DimensionError("TpsModel: centers and coefficients differ in length");
}

TpsModel fit_tps(const Dataset& data, double lambda) {
  if (data.d != 2) throw DimensionError("fit_tps needs 2D data");
  if (!(lambda >= 0.0)) throw DomainError("fit_tps: lambda must be nonnegative");
  data.validate();
  const std::size_t n = data.size();
  if (n < 4) throw DomainError("fit_tps needs at least four points");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& p = data.points;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return p[2 * i] < p[2 * j] || (p[2 * i] == p[2 * j] && p[2 * i + 1] < p[2 * j + 1]);
  });
  for (std::size_t i = 1; i < n; ++i)
    if (p[2 * order[i]] == p[2 * order[i - 1]] && p[2 * order[i] + 1] == p[2 * order[i - 1] + 1])
      throw DomainError("fit_tps: duplicate design points");

  Eigen::MatrixXd centered(n, 2);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>> pts(p.data(), n, 2);
  centered = pts.rowwise() - pts.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 1e-10 * std::max(sv(0), 1e-300))) throw DomainError("fit_tps: design points are collinear");

  const Eigen::Index m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 3, m + 3);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      sys(i, j) = sys(j, i) = phi_sq(dist_sq(p[2 * i], p[2 * i + 1], p[2 * j], p[2 * j + 1]));
    }
    sys(i, i) = static_cast<double>(n) * lambda;
    sys(i, m) = sys(m, i) = 1.0;
    sys(i, m + 1) = sys(m + 1, i) = p[2 * i];
    sys(i, m + 2) = sys(m + 2, i) = p[2 * i + 1];
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 3);
  for (Eigen::Index i = 0; i < m; ++i) rhs(i) = data.y[i];
  const Eigen::VectorXd sol = sys.partialPivLu().solve(rhs);
  if (!sol.allFinite()) throw NumericalError("fit_tps: singular system", 0);

  TpsModel model;
  model.centers = p;
  model.a.assign(sol.data(), sol.data() + m);
  model.poly = {sol(m), sol(m + 1), sol(m + 2)};
  model.lambda = lambda;
  return model;
}

double eval_tps(const TpsModel& model, std::span<const double> x) {
  if (x.size() != 2) throw DimensionError("eval_tps expects a 2D point");
  double f = model.poly[0] + model.poly[1] * x[0] + model.poly[2] * x[1];
  for (std::size_t i = 0; i < model.a.size(); ++i)
    f += model.a[i] * phi_sq(dist_sq(x[0], x[1], model.centers[2 * i], model.centers[2 * i + 1]));
  return f;
}

std::vector<double> eval_tps(const TpsModel& model, std::span<const double> points, std::size_t count) {
  if (points.size() != 2 * count) throw DimensionError("eval_tps: expected row-major N x 2 points");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = eval_tps(model, points.subspan(2 * i, 2));
  return out;
}

}  // namespace adaptix
