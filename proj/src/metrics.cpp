#include "latentdem/metrics.hpp"

#include "latentdem/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace latentdem {

double mse_grid(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  if (a.size() == 0) throw Error("mse: empty image");
  const auto n = static_cast<std::size_t>(a.size());
  return simd::squared_distance({a.pixels.data(), n}, {b.pixels.data(), n}) / static_cast<double>(n);
}

double mse_grid(const Kernel& a, const Kernel& b) {
  if (a.size != b.size) throw Error("mse: kernel sizes differ");
  return simd::squared_distance(a.values, b.values) / static_cast<double>(a.values.size());
}

double psnr(const Image& a, const Image& b, double peak) {
  const double m = mse_grid(a, b);
  if (m == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / m));
}

double ssim(const Image& a, const Image& b, double peak) {
  require_same_shape(a, b, "ssim");
  constexpr int win = 8;
  if (a.rows < win || a.cols < win) throw Error("ssim: image smaller than the 8x8 window");
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const double n = win * win;
  double total = 0.0;
  int windows = 0;
  for (int r = 0; r + win <= a.rows; ++r) {
    for (int c = 0; c + win <= a.cols; ++c) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i) {
        for (int j = 0; j < win; ++j) {
          const double va = a.at(r + i, c + j), vb = b.at(r + i, c + j);
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      const double ma = sa / n, mb = sb / n;
      const double va = saa / n - ma * ma, vb = sbb / n - mb * mb, cov = sab / n - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / windows;
}

double mnc(const Kernel& k_hat, const Kernel& k_true) {
  // Both kernels live on a zero-padded grid large enough that circular
  // shifts never wrap mass onto itself.
  const int n = k_hat.size + k_true.size - 1;
  double na = 0.0, nb = 0.0;
  for (double v : k_hat.values) na += v * v;
  for (double v : k_true.values) nb += v * v;
  if (na == 0.0 || nb == 0.0) throw Error("mnc: zero kernel");
  double best = -std::numeric_limits<double>::infinity();
  for (int dy = 0; dy < n; ++dy) {
    for (int dx = 0; dx < n; ++dx) {
      double s = 0.0;
      for (int i = 0; i < k_true.size; ++i) {
        for (int j = 0; j < k_true.size; ++j) {
          const int hi = (i + dy) % n, hj = (j + dx) % n;
          if (hi < k_hat.size && hj < k_hat.size) s += k_hat.at(hi, hj) * k_true.at(i, j);
        }
      }
      best = std::max(best, s);
    }
  }
  return best / std::sqrt(na * nb);
}

MetricReport compare_images(const Image& estimate, const Image& truth, double peak) {
  MetricReport r;
  r.mse = mse_grid(estimate, truth);
  r.psnr_db = psnr(estimate, truth, peak);
  r.ssim = ssim(estimate, truth, peak);
  return r;
}

}  // namespace latentdem
