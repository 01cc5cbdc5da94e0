#pragma once

// Data-parallel inner loops used by the FFT-domain solvers, the codec and the
// metrics. Each kernel has a scalar reference and (on x86-64) an AVX2 variant;
// the variant is chosen once at runtime from CPUID. LATENTDEM_SIMD=scalar in
// the environment forces the reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace latentdem::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// out = a * b (or a * conj(b)) over interleaved complex arrays of n elements.
  void (*spectral_product)(const double* a, const double* b, double* out, std::size_t n, bool conj_b);
  /// out = (conj(x) * y + w * phi) / (|x|^2 + w); returns the smallest denominator.
  double (*hqs_update)(const double* x, const double* y, const double* phi, double w, double* out,
                       std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels();
/// Kernel table used by the library.
const KernelTable& active();

std::string_view isa_name(Isa isa);

// Convenience wrappers over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline const double* as_doubles(const std::complex<double>* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(std::complex<double>* p) { return reinterpret_cast<double*>(p); }

}  // namespace latentdem::simd
