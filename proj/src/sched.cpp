#include "latentdem/sched.hpp"

#include <cmath>
#include <string>

namespace latentdem {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : beta_(std::move(betas)) {
  if (beta_.empty()) throw Error("schedule: step count must be positive");
  alpha_.resize(beta_.size());
  alpha_bar_.resize(beta_.size());
  sigma_tilde_.resize(beta_.size());
  double prev = 1.0;
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    const double b = beta_[i];
    if (!(b >= 0.0 && b < 1.0)) throw Error("schedule: beta must lie in [0, 1), got " + std::to_string(b));
    alpha_[i] = 1.0 - b;
    alpha_bar_[i] = alpha_[i] * prev;
    const double denom = 1.0 - alpha_bar_[i];
    sigma_tilde_[i] = denom > 0.0 ? std::sqrt(b * (1.0 - prev) / denom) : 0.0;
    prev = alpha_bar_[i];
  }
}

std::size_t NoiseSchedule::index(int t) const {
  if (t < 1 || t > steps()) {
    throw Error("schedule: step " + std::to_string(t) + " outside 1.." + std::to_string(steps()));
  }
  return static_cast<std::size_t>(t - 1);
}

NoiseSchedule build_linear_schedule(int steps, double beta_min, double beta_max) {
  if (steps < 1) throw Error("schedule: step count must be positive");
  if (beta_max >= 1.0) throw Error("schedule: beta_max must be < 1");
  if (beta_min < 0.0 || beta_min > beta_max) throw Error("schedule: need 0 <= beta_min <= beta_max");
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    betas[static_cast<std::size_t>(i)] = beta_min + (beta_max - beta_min) * frac;
  }
  return NoiseSchedule(std::move(betas));
}

ReverseCoeffs reverse_coeffs(const NoiseSchedule& s, int t) {
  // A zero-noise step is the identity (the limit of the general formula).
  if (s.beta(t) == 0.0) return {1.0, 0.0, 0.0};
  const double ab = s.alpha_bar(t);
  const double ab_prev = s.alpha_bar(t - 1);
  const double denom = 1.0 - ab;
  if (denom == 0.0) throw Error("reverse_coeffs: 1 - alpha_bar is zero at step " + std::to_string(t));
  return {std::sqrt(s.alpha(t)) * (1.0 - ab_prev) / denom, std::sqrt(ab_prev) * s.beta(t) / denom,
          s.sigma_tilde(t)};
}

Vec tweedie_estimate(const Vec& z_t, const Vec& score, const NoiseSchedule& s, int t) {
  if (z_t.size() != score.size()) throw Error("tweedie_estimate: score dimension mismatch");
  const double ab = s.alpha_bar(t);
  if (ab <= 0.0) throw Error("tweedie_estimate: alpha_bar is zero at step " + std::to_string(t));
  return (z_t + (1.0 - ab) * score) / std::sqrt(ab);
}

}  // namespace latentdem
