#pragma once

#include "latentdem/types.hpp"

#include <vector>

namespace latentdem {

/// Discrete variance-preserving (DDPM) schedule. Steps are 1-based:
/// t = 1..T, with alpha_bar(0) := 1.
class NoiseSchedule {
 public:
  /// Builds alpha, alpha_bar and the DDPM posterior std from per-step betas.
  explicit NoiseSchedule(std::vector<double> betas);

  [[nodiscard]] int steps() const { return static_cast<int>(beta_.size()); }
  [[nodiscard]] double beta(int t) const { return beta_.at(index(t)); }
  [[nodiscard]] double alpha(int t) const { return alpha_.at(index(t)); }
  /// Accepts t = 0 (returns 1).
  [[nodiscard]] double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bar_.at(index(t)); }
  [[nodiscard]] double sigma_tilde(int t) const { return sigma_tilde_.at(index(t)); }

  [[nodiscard]] const std::vector<double>& betas() const { return beta_; }
  [[nodiscard]] const std::vector<double>& alpha_bars() const { return alpha_bar_; }

 private:
  [[nodiscard]] std::size_t index(int t) const;

  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
  std::vector<double> sigma_tilde_;
};

/// Linear betas from beta_min (t = 1) to beta_max (t = T).
NoiseSchedule build_linear_schedule(int steps, double beta_min, double beta_max);

struct ReverseCoeffs {
  double c_z;
  double c_0;
  double sigma_tilde;
};

/// z_{t-1} = c_z z_t + c_0 z0_hat + sigma_tilde eps.
ReverseCoeffs reverse_coeffs(const NoiseSchedule& s, int t);

/// Tweedie estimate of E[z_0 | z_t] from a score evaluated at z_t.
Vec tweedie_estimate(const Vec& z_t, const Vec& score, const NoiseSchedule& s, int t);

}  // namespace latentdem
