#include <atomic>
#include <cstdlib>
#include <string>

#include "adaptix/error.hpp"
#include "adaptix/kernels.hpp"

namespace adaptix::kernels {
namespace {

constexpr KernelTable kScalar{Isa::Scalar, scalar::relu_accumulate, scalar::relu_correlate,
                              scalar::dot, scalar::squared_distance};
#if defined(ADAPTIX_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, avx2::relu_accumulate, avx2::relu_correlate, avx2::dot,
                            avx2::squared_distance};
#endif

Isa detect() {
  if (const char* env = std::getenv("ADAPTIX_ISA")) {
    const std::string s(env);
    if (s == "scalar") return Isa::Scalar;
    if (s == "avx2" && available(Isa::Avx2)) return Isa::Avx2;
  }
  return available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{&table(detect())};
  return current;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(ADAPTIX_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw Error("kernel ISA not available: " + std::string(isa_name(isa)));
#if defined(ADAPTIX_HAVE_AVX2)
  if (isa == Isa::Avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) { slot().store(&table(isa), std::memory_order_relaxed); }

void relu_accumulate(std::span<const double> cols, std::size_t d, std::span<const double> w,
                     double b, double v, std::span<double> out) {
  active().relu_accumulate(cols.data(), out.size(), d, w.data(), b, v, out.data());
}

NeuronSums relu_correlate(std::span<const double> cols, std::size_t d, std::span<const double> w,
                          double b, std::span<const double> r, std::span<double> x_sums) {
  return active().relu_correlate(cols.data(), r.size(), d, w.data(), b, r.data(), x_sums.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace adaptix::kernels
