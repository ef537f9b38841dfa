#pragma once

// Data-parallel inner loops of the ReLU network: one neuron against a block
// of design points stored column-major (cols[j * n + i] is coordinate j of
// point i). Each kernel has a scalar reference implementation and, on x86-64,
// an AVX2/FMA variant chosen at runtime.

#include <cstddef>
#include <span>
#include <string_view>

namespace adaptix::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Per-neuron reductions against a residual vector r:
///   act  = sum_i r_i * relu(z_i)
///   mask = sum_i r_i * [z_i > 0]
///   x[j] = sum_i r_i * [z_i > 0] * cols[j][i]
/// where z_i = w . x_i - b.
struct NeuronSums {
  double act = 0.0;
  double mask = 0.0;
};

struct KernelTable {
  Isa isa;
  /// out[i] += v * relu(w . x_i - b)
  void (*relu_accumulate)(const double* cols, std::size_t n, std::size_t d, const double* w,
                          double b, double v, double* out) noexcept;
  /// Fills the NeuronSums and x_sums[0..d).
  NeuronSums (*relu_correlate)(const double* cols, std::size_t n, std::size_t d, const double* w,
                               double b, const double* r, double* x_sums) noexcept;
  /// sum_i a_i * b_i
  double (*dot)(const double* a, const double* b, std::size_t n) noexcept;
  /// sum_i (a_i - b_i)^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n) noexcept;
};

/// Table for a specific ISA; throws adaptix::Error if it is unavailable.
const KernelTable& table(Isa isa);

/// Whether this build and CPU support `isa`.
bool available(Isa isa) noexcept;

/// Best available ISA, unless overridden by force_isa() or the environment
/// variable ADAPTIX_ISA=scalar|avx2.
const KernelTable& active();

/// Pins the dispatch to `isa` for the rest of the process (tests, benchmarks).
void force_isa(Isa isa);

// Convenience wrappers over active().
void relu_accumulate(std::span<const double> cols, std::size_t d, std::span<const double> w,
                     double b, double v, std::span<double> out);
NeuronSums relu_correlate(std::span<const double> cols, std::size_t d, std::span<const double> w,
                          double b, std::span<const double> r, std::span<double> x_sums);
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

namespace scalar {
void relu_accumulate(const double* cols, std::size_t n, std::size_t d, const double* w, double b,
                     double v, double* out) noexcept;
NeuronSums relu_correlate(const double* cols, std::size_t n, std::size_t d, const double* w,
                          double b, const double* r, double* x_sums) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
double squared_distance(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace scalar

#if defined(ADAPTIX_HAVE_AVX2)
namespace avx2 {
void relu_accumulate(const double* cols, std::size_t n, std::size_t d, const double* w, double b,
                     double v, double* out) noexcept;
NeuronSums relu_correlate(const double* cols, std::size_t n, std::size_t d, const double* w,
                          double b, const double* r, double* x_sums) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
double squared_distance(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace avx2
#endif

}  // namespace adaptix::kernels
