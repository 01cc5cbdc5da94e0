#include "kernels_impl.hpp"

#include <algorithm>
#include <limits>

namespace latentdem::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void spectral_product(const double* a, const double* b, double* out, std::size_t n, bool conj_b) {
  const double sign = conj_b ? -1.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = sign * b[2 * i + 1];
    out[2 * i] = ar * br - ai * bi;
    out[2 * i + 1] = ar * bi + ai * br;
  }
}

double hqs_update(const double* x, const double* y, const double* phi, double w, double* out, std::size_t n) {
  double min_den = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    const double yr = y[2 * i], yi = y[2 * i + 1];
    // conj(x) * y
    const double nr = xr * yr + xi * yi + w * phi[2 * i];
    const double ni = xr * yi - xi * yr + w * phi[2 * i + 1];
    const double den = xr * xr + xi * xi + w;
    min_den = std::min(min_den, den);
    out[2 * i] = nr / den;
    out[2 * i + 1] = ni / den;
  }
  return min_den;
}

}  // namespace latentdem::simd::scalar
