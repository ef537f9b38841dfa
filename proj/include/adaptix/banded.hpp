#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adaptix {

/// Symmetric positive-definite band matrix with `bandwidth` sub-diagonals,
/// factored in place as L L^T. Storage is lower-band: entry (i, i - k) lives at
/// band_[i * (p + 1) + k] for k = 0..p.
class BandedSpd {
 public:
  BandedSpd(std::size_t n, std::size_t bandwidth);

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return p_; }

  /// Element (i, j) with |i - j| <= bandwidth, i >= j.
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  /// Cholesky factorization. Throws DomainError if a pivot is not positive.
  void factor();

  /// Solves A x = rhs in place using the factorization.
  void solve(std::span<double> rhs) const;

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<double> band_;
  bool factored_ = false;
};

}  // namespace adaptix
