// Compiled with -mavx2; only reached after a CPUID check in dispatch.cpp.
#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace latentdem::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// [ar, ai, ...] * [br, bi, ...] as two complex lanes.
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d are = _mm256_movedup_pd(a);
  const __m256d aim = _mm256_permute_pd(a, 0xF);
  const __m256d bsw = _mm256_permute_pd(b, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(are, b), _mm256_mul_pd(aim, bsw));
}

const __m256d kConjMask = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void spectral_product(const double* a, const double* b, double* out, std::size_t n, bool conj_b) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vb = _mm256_loadu_pd(b + 2 * i);
    if (conj_b) vb = _mm256_xor_pd(vb, kConjMask);
    _mm256_storeu_pd(out + 2 * i, cmul(_mm256_loadu_pd(a + 2 * i), vb));
  }
  if (i < n) scalar::spectral_product(a + 2 * i, b + 2 * i, out + 2 * i, n - i, conj_b);
}

double hqs_update(const double* x, const double* y, const double* phi, double w, double* out, std::size_t n) {
  const __m256d vw = _mm256_set1_pd(w);
  __m256d vmin = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(x + 2 * i);
    const __m256d num = _mm256_add_pd(cmul(_mm256_xor_pd(vx, kConjMask), _mm256_loadu_pd(y + 2 * i)),
                                      _mm256_mul_pd(vw, _mm256_loadu_pd(phi + 2 * i)));
    const __m256d sq = _mm256_mul_pd(vx, vx);
    const __m256d den = _mm256_add_pd(_mm256_hadd_pd(sq, sq), vw);
    vmin = _mm256_min_pd(vmin, den);
    _mm256_storeu_pd(out + 2 * i, _mm256_div_pd(num, den));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmin);
  double min_den = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
  if (i < n) min_den = std::min(min_den, scalar::hqs_update(x + 2 * i, y + 2 * i, phi + 2 * i, w, out + 2 * i, n - i));
  return min_den;
}

}  // namespace latentdem::simd::avx2
