#include "adaptix/kernels.hpp"

namespace adaptix::kernels::scalar {

void relu_accumulate(const double* cols, std::size_t n, std::size_t d, const double* w, double b,
                     double v, double* out) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    double z = -b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * cols[j * n + i];
    if (z > 0.0) out[i] += v * z;
  }
}

NeuronSums relu_correlate(const double* cols, std::size_t n, std::size_t d, const double* w,
                          double b, const double* r, double* x_sums) noexcept {
  NeuronSums s;
  for (std::size_t j = 0; j < d; ++j) x_sums[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = -b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * cols[j * n + i];
    if (z > 0.0) {
      s.act += r[i] * z;
      s.mask += r[i];
      for (std::size_t j = 0; j < d; ++j) x_sums[j] += r[i] * cols[j * n + i];
    }
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace adaptix::kernels::scalar
