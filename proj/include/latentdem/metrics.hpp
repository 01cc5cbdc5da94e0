#pragma once

#include "latentdem/forward.hpp"
#include "latentdem/types.hpp"

#include <optional>

namespace latentdem {

/// PSNR reported for identical images.
inline constexpr double kPsnrCap = 100.0;

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double mse = 0.0;
  std::optional<double> mnc;
  std::optional<double> kernel_mse;
};

double mse_grid(const Image& a, const Image& b);
double mse_grid(const Kernel& a, const Kernel& b);
/// 10 log10(peak^2 / MSE), capped at kPsnrCap.
double psnr(const Image& a, const Image& b, double peak = 1.0);
/// Mean SSIM over all 8x8 windows (stride 1, uniform weights).
double ssim(const Image& a, const Image& b, double peak = 1.0);
/// Max over shifts of <shift(k_hat), k_true> / (|k_hat| |k_true|).
double mnc(const Kernel& k_hat, const Kernel& k_true);

MetricReport compare_images(const Image& estimate, const Image& truth, double peak = 1.0);

}  // namespace latentdem
