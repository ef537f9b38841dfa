// Compiled with -mavx2 -mfma; only reached through the dispatch table after a
// CPUID check.
#include <immintrin.h>

#include "adaptix/kernels.hpp"

namespace adaptix::kernels::avx2 {
namespace {

constexpr std::size_t kMaxDim = 16;

inline double hsum(__m256d v) noexcept {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d preactivation(const double* cols, std::size_t n, std::size_t d, const double* w,
                             __m256d neg_b, std::size_t i) noexcept {
  __m256d z = neg_b;
  for (std::size_t j = 0; j < d; ++j)
    z = _mm256_fmadd_pd(_mm256_set1_pd(w[j]), _mm256_loadu_pd(cols + j * n + i), z);
  return z;
}

}  // namespace

void relu_accumulate(const double* cols, std::size_t n, std::size_t d, const double* w, double b,
                     double v, double* out) noexcept {
  const __m256d neg_b = _mm256_set1_pd(-b);
  const __m256d vv = _mm256_set1_pd(v);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z = _mm256_max_pd(preactivation(cols, n, d, w, neg_b, i), zero);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vv, z, _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) {
    double z = -b;
    for (std::size_t j = 0; j < d; ++j) z = __builtin_fma(w[j], cols[j * n + i], z);
    if (z > 0.0) out[i] = __builtin_fma(v, z, out[i]);
  }
}

NeuronSums relu_correlate(const double* cols, std::size_t n, std::size_t d, const double* w,
                          double b, const double* r, double* x_sums) noexcept {
  if (d > kMaxDim) return scalar::relu_correlate(cols, n, d, w, b, r, x_sums);
  const __m256d neg_b = _mm256_set1_pd(-b);
  const __m256d zero = _mm256_setzero_pd();
  __m256d act = zero;
  __m256d mask = zero;
  __m256d xs[kMaxDim];
  for (std::size_t j = 0; j < d; ++j) xs[j] = zero;

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z = preactivation(cols, n, d, w, neg_b, i);
    const __m256d on = _mm256_cmp_pd(z, zero, _CMP_GT_OQ);
    const __m256d rm = _mm256_and_pd(_mm256_loadu_pd(r + i), on);
    act = _mm256_fmadd_pd(rm, z, act);
    mask = _mm256_add_pd(mask, rm);
    for (std::size_t j = 0; j < d; ++j)
      xs[j] = _mm256_fmadd_pd(rm, _mm256_loadu_pd(cols + j * n + i), xs[j]);
  }

  NeuronSums s{hsum(act), hsum(mask)};
  for (std::size_t j = 0; j < d; ++j) x_sums[j] = hsum(xs[j]);
  for (; i < n; ++i) {
    double z = -b;
    for (std::size_t j = 0; j < d; ++j) z = __builtin_fma(w[j], cols[j * n + i], z);
    if (z > 0.0) {
      s.act += r[i] * z;
      s.mask += r[i];
      for (std::size_t j = 0; j < d; ++j) x_sums[j] += r[i] * cols[j * n + i];
    }
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    s0 = _mm256_fmadd_pd(t0, t0, s0);
    s1 = _mm256_fmadd_pd(t1, t1, s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace adaptix::kernels::avx2
