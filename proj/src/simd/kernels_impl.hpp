#pragma once

#include <cstddef>

namespace latentdem::simd {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void spectral_product(const double* a, const double* b, double* out, std::size_t n, bool conj_b);
double hqs_update(const double* x, const double* y, const double* phi, double w, double* out, std::size_t n);
}  // namespace scalar

#if defined(LATENTDEM_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void spectral_product(const double* a, const double* b, double* out, std::size_t n, bool conj_b);
double hqs_update(const double* x, const double* y, const double* phi, double w, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace latentdem::simd
