#pragma once

#include "latentdem/codec.hpp"
#include "latentdem/forward.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace latentdem {

struct HQSConfig {
  double lambda = 1.0;
  double delta = 5e6;
  int iterations = 20;
  double sigma = 0.01;

  void validate() const;
};

/// Plug-and-play kernel regularizer D_{sigma_d}.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  [[nodiscard]] virtual Kernel denoise(const Kernel& noisy, double sigma_d) const = 0;
};

/// Euclidean projection onto the probability simplex; ignores sigma_d.
class ProjectionDenoiser final : public Denoiser {
 public:
  [[nodiscard]] Kernel denoise(const Kernel& noisy, double sigma_d) const override;
};

/// Gaussian smoothing with std sigma_d (pixels), then simplex projection.
class GaussianSmoothingDenoiser final : public Denoiser {
 public:
  [[nodiscard]] Kernel denoise(const Kernel& noisy, double sigma_d) const override;
};

/// Exact minimizer over the full grid of
///   1/(2 sigma^2) |x0 * Z - y|^2 + delta/2 |Z - phi_prev|^2,
/// computed in the Fourier domain. Returns the full-grid Z.
Image hqs_data_update_full(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg);
/// hqs_data_update_full cropped to the kernel support.
Kernel hqs_data_update(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg);

/// Euclidean projection onto {k >= 0, sum k = 1} (sort-based).
Kernel simplex_project(const Kernel& v);
std::vector<double> simplex_project(const std::vector<double>& v);

struct HQSTraceRow {
  int iteration;
  double objective;
  std::optional<double> kernel_mse;
};

/// Alternates hqs_data_update and the denoiser (sigma_d = sqrt(lambda/delta))
/// for cfg.iterations rounds, then projects onto the simplex.
Kernel estimate_kernel(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg,
                       const Denoiser& denoiser, std::vector<HQSTraceRow>* trace = nullptr,
                       const Kernel* truth = nullptr);

/// Objective of the data sub-problem on the full grid (used by traces and tests).
double hqs_objective(const Image& y, const Image& x0_hat, const Image& z_full, const Image& phi_prev_full,
                     const HQSConfig& cfg);

// ---------------------------------------------------------------------------
// Pose

struct PoseOptions {
  double lr = 1.0;
  int steps = 50;
  /// Central-difference step (radians).
  double fd_step = 1e-3;
  /// Largest angle change per iteration (radians).
  double max_step = 0.1;
  /// Gradient magnitude below which the loss is reported as flat.
  double flat_tolerance = 1e-4;
};

struct PoseEstimate {
  PoseParam pose;
  double loss_start = 0.0;
  double loss_end = 0.0;
  bool flat = false;
  std::vector<double> loss_trace;
};

/// lambda |z(y2, phi) - z(x0_hat, 0)|^2 + delta |z(y2, phi) - z(y1, phi1)|^2,
/// with z(y, phi) = encode(view_transform(y, phi)).
class PoseLoss {
 public:
  PoseLoss(const Image& y2, const Image& x0_hat, const Image& y1, const PoseParam& phi1, double lambda, double delta,
           const LinearCodec& codec);
  double operator()(double angle) const;

 private:
  const Image& y2_;
  const LinearCodec& codec_;
  Vec z_synth_;
  Vec z_ref_;
  double lambda_, delta_;
};

PoseEstimate estimate_pose(const Image& y2, const Image& x0_hat, const Image& y1, const PoseParam& phi1,
                           const PoseParam& phi2_prev, double lambda, double delta, const PoseOptions& opts,
                           const LinearCodec& codec);

struct LambdaDelta {
  double lambda;
  double delta;
};

/// lambda/delta rises linearly from ratio_start at t = T to 1 at t = 0; delta = 1.
LambdaDelta lambda_delta_schedule(int t, int steps, double ratio_start = 0.05);

}  // namespace latentdem
