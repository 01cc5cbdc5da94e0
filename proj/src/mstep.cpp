#include "latentdem/mstep.hpp"

#include "latentdem/simd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace latentdem {

void HQSConfig::validate() const {
  if (!(lambda > 0.0)) throw Error("hqs: lambda must be positive");
  if (!(delta > 0.0)) throw Error("hqs: delta must be positive");
  if (iterations < 1) throw Error("hqs: iterations must be >= 1");
  if (!(sigma >= 0.0)) throw Error("hqs: sigma must be non-negative");
}

// ---------------------------------------------------------------------------
// Data sub-problem

Image hqs_data_update_full(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg) {
  require_same_shape(y, x0_hat, "hqs_data_update");
  const ComplexGrid fx = fft2(x0_hat);
  const ComplexGrid fy = fft2(y);
  const ComplexGrid fphi = fft2(phi_prev.embed(y.rows, y.cols));
  const double w = cfg.delta * cfg.sigma * cfg.sigma;
  ComplexGrid out(y.rows, y.cols);
  const double min_den =
      simd::active().hqs_update(simd::as_doubles(fx.data.data()), simd::as_doubles(fy.data.data()),
                                simd::as_doubles(fphi.data.data()), w, simd::as_doubles(out.data.data()),
                                out.data.size());
  if (w == 0.0) {
    double max_den = 0.0;
    for (const auto& v : fx.data) max_den = std::max(max_den, std::norm(v));
    if (!(min_den > 1e-12 * max_den)) {
      throw SingularDivision("hqs_data_update: delta*sigma^2 = 0 and the estimate's spectrum has a zero");
    }
  }
  return ifft2_real(out);
}

Kernel hqs_data_update(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg) {
  return Kernel::crop(hqs_data_update_full(y, x0_hat, phi_prev, cfg), phi_prev.size);
}

double hqs_objective(const Image& y, const Image& x0_hat, const Image& z_full, const Image& phi_prev_full,
                     const HQSConfig& cfg) {
  const Image pred = convolve_grid(x0_hat, z_full);
  const double data = simd::squared_distance({pred.pixels.data(), static_cast<std::size_t>(pred.size())},
                                             {y.pixels.data(), static_cast<std::size_t>(y.size())});
  const double split = (z_full.pixels - phi_prev_full.pixels).squaredNorm();
  return data / (2.0 * cfg.sigma * cfg.sigma) + 0.5 * cfg.delta * split;
}

// ---------------------------------------------------------------------------
// Simplex projection

std::vector<double> simplex_project(const std::vector<double>& v) {
  if (v.empty()) throw Error("simplex_project: empty input");
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [theta](double x) { return std::max(x - theta, 0.0); });
  return out;
}

Kernel simplex_project(const Kernel& v) { return Kernel(v.size, simplex_project(v.values)); }

// ---------------------------------------------------------------------------
// Denoisers

Kernel ProjectionDenoiser::denoise(const Kernel& noisy, double) const { return simplex_project(noisy); }

Kernel GaussianSmoothingDenoiser::denoise(const Kernel& noisy, double sigma_d) const {
  if (!(sigma_d > 1e-3)) return simplex_project(noisy);
  const int k = noisy.size;
  const int r = static_cast<int>(std::ceil(3.0 * sigma_d));
  std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
  for (int i = -r; i <= r; ++i) taps[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma_d * sigma_d));
  const double norm = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= norm;
  Kernel tmp(k), out(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int d = -r; d <= r; ++d) {
        if (j + d >= 0 && j + d < k) s += taps[static_cast<std::size_t>(d + r)] * noisy.at(i, j + d);
      }
      tmp.at(i, j) = s;
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int d = -r; d <= r; ++d) {
        if (i + d >= 0 && i + d < k) s += taps[static_cast<std::size_t>(d + r)] * tmp.at(i + d, j);
      }
      out.at(i, j) = s;
    }
  }
  return simplex_project(out);
}

// ---------------------------------------------------------------------------
// Kernel estimation

Kernel estimate_kernel(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg,
                       const Denoiser& denoiser, std::vector<HQSTraceRow>* trace, const Kernel* truth) {
  cfg.validate();
  const double sigma_d = std::sqrt(cfg.lambda / cfg.delta);
  Kernel phi = phi_prev;
  for (int it = 0; it < cfg.iterations; ++it) {
    const Kernel z = hqs_data_update(y, x0_hat, phi, cfg);
    phi = denoiser.denoise(z, sigma_d);
    if (trace != nullptr) {
      const Image pred = convolve(x0_hat, phi);
      const double obj = (pred.pixels - y.pixels).squaredNorm() / (2.0 * cfg.sigma * cfg.sigma);
      std::optional<double> mse;
      if (truth != nullptr && truth->size == phi.size) {
        double s = 0.0;
        for (std::size_t i = 0; i < phi.values.size(); ++i) s += std::pow(phi.values[i] - truth->values[i], 2);
        mse = s / static_cast<double>(phi.values.size());
      }
      trace->push_back({it + 1, obj, mse});
    }
  }
  return simplex_project(phi);
}

// ---------------------------------------------------------------------------
// Pose

PoseLoss::PoseLoss(const Image& y2, const Image& x0_hat, const Image& y1, const PoseParam& phi1, double lambda,
                   double delta, const LinearCodec& codec)
    : y2_(y2),
      codec_(codec),
      z_synth_(codec.encode(x0_hat)),
      z_ref_(codec.encode(view_transform(y1, phi1))),
      lambda_(lambda),
      delta_(delta) {}

double PoseLoss::operator()(double angle) const {
  const Vec z = codec_.encode(view_transform(y2_, PoseParam(angle)));
  return lambda_ * (z - z_synth_).squaredNorm() + delta_ * (z - z_ref_).squaredNorm();
}

PoseEstimate estimate_pose(const Image& y2, const Image& x0_hat, const Image& y1, const PoseParam& phi1,
                           const PoseParam& phi2_prev, double lambda, double delta, const PoseOptions& opts,
                           const LinearCodec& codec) {
  if (!(opts.lr > 0.0)) throw Error("estimate_pose: lr must be positive");
  if (y2.rows != y2.cols || y1.rows != y1.cols) throw Error("estimate_pose: images must be square");
  const PoseLoss loss(y2, x0_hat, y1, phi1, lambda, delta, codec);
  const double h = opts.fd_step;
  auto gradient = [&](double a) { return (loss(a + h) - loss(a - h)) / (2.0 * h); };

  PoseEstimate est;
  double angle = phi2_prev.angle;
  double value = loss(angle);
  est.loss_start = value;
  est.loss_trace.push_back(value);
  for (int it = 0; it < opts.steps; ++it) {
    const double g = gradient(angle);
    if (std::abs(g) < opts.flat_tolerance) {
      if (it == 0) est.flat = true;
      break;
    }
    double step = std::clamp(-opts.lr * g, -opts.max_step, opts.max_step);
    double trial = angle + step;
    double trial_value = loss(trial);
    int halvings = 0;
    while (trial_value > value && halvings < 30) {
      step *= 0.5;
      trial = angle + step;
      trial_value = loss(trial);
      ++halvings;
    }
    if (trial_value > value) break;
    angle = trial;
    value = trial_value;
    est.loss_trace.push_back(value);
  }
  est.pose = phi2_prev;
  est.pose.angle = PoseParam::normalize_angle(angle);
  est.loss_end = value;
  return est;
}

LambdaDelta lambda_delta_schedule(int t, int steps, double ratio_start) {
  if (steps < 1) throw Error("lambda_delta_schedule: steps must be positive");
  const double frac = static_cast<double>(std::clamp(t, 0, steps)) / steps;
  return {1.0 - (1.0 - ratio_start) * frac, 1.0};
}

}  // namespace latentdem
