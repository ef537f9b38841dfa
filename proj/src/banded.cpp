#include "adaptix/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaptix/error.hpp"

namespace adaptix {

BandedSpd::BandedSpd(std::size_t n, std::size_t bandwidth)
    : n_(n), p_(bandwidth), band_(n * (bandwidth + 1), 0.0) {}

double& BandedSpd::at(std::size_t i, std::size_t j) {
  if (j > i || i - j > p_) throw DomainError("BandedSpd: index outside lower band");
  return band_[i * (p_ + 1) + (i - j)];
}

double BandedSpd::at(std::size_t i, std::size_t j) const {
  if (j > i || i - j > p_) return 0.0;
  return band_[i * (p_ + 1) + (i - j)];
}

void BandedSpd::factor() {
  const std::size_t w = p_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t first = i > p_ ? i - p_ : 0;
    for (std::size_t j = first; j <= i; ++j) {
      double s = band_[i * w + (i - j)];
      const std::size_t kfirst = std::max(first, j > p_ ? j - p_ : std::size_t{0});
      for (std::size_t k = kfirst; k < j; ++k) s -= band_[i * w + (i - k)] * band_[j * w + (j - k)];
      if (j == i) {
        if (!(s > 0.0)) throw DomainError("BandedSpd: matrix not positive definite at row " + std::to_string(i));
        band_[i * w] = std::sqrt(s);
      } else {
        band_[i * w + (i - j)] = s / band_[j * w];
      }
    }
  }
  factored_ = true;
}

void BandedSpd::solve(std::span<double> rhs) const {
  if (!factored_) throw Error("BandedSpd::solve called before factor()");
  if (rhs.size() != n_) throw DimensionError("BandedSpd::solve: rhs size mismatch");
  const std::size_t w = p_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = rhs[i];
    const std::size_t first = i > p_ ? i - p_ : 0;
    for (std::size_t k = first; k < i; ++k) s -= band_[i * w + (i - k)] * rhs[k];
    rhs[i] = s / band_[i * w];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = rhs[ii];
    const std::size_t last = std::min(n_ - 1, ii + p_);
    for (std::size_t k = ii + 1; k <= last; ++k) s -= band_[k * w + (k - ii)] * rhs[k];
    rhs[ii] = s / band_[ii * w];
  }
}

}  // namespace adaptix
