#include "latentdem/multiview.hpp"

#include <cmath>
#include <limits>

namespace latentdem {

double ViewWeightSchedule::nu(int t) const {
  if (steps < 1) throw Error("view weights: steps must be positive");
  if (std::isinf(nu_max)) return t > 0 ? nu_max : 0.0;
  return nu_max * static_cast<double>(t) / steps;
}

double gamma_t(double beta_t, double nu_t) {
  if (!(beta_t > 0.0)) throw Error("gamma_t: beta must be positive");
  if (std::isinf(nu_t)) return 0.0;
  return beta_t / (2.0 * beta_t + nu_t * nu_t);
}

double combined_variance(double beta_t, double nu_t) {
  if (std::isinf(nu_t)) return beta_t;
  const double nu2 = nu_t * nu_t;
  return beta_t * (beta_t + nu2) / (2.0 * beta_t + nu2);
}

Vec combine_scores(const Vec& s1, const Vec& s2, double gamma) {
  if (s1.size() != s2.size()) throw Error("combine_scores: dimension mismatch");
  if (gamma < 0.0 || gamma > 1.0) throw Error("combine_scores: gamma must lie in [0, 1]");
  return (1.0 - gamma) * s1 + gamma * s2;
}

std::vector<double> view_weights(double beta_t, std::span<const double> nus) {
  if (nus.empty()) throw Error("view_weights: no views");
  if (!(beta_t > 0.0)) throw Error("view_weights: beta must be positive");
  std::vector<double> prec(nus.size());
  double total = 0.0;
  for (std::size_t i = 0; i < nus.size(); ++i) {
    const double var = i == 0 ? beta_t : beta_t + nus[i] * nus[i];
    prec[i] = std::isinf(var) ? 0.0 : 1.0 / var;
    total += prec[i];
  }
  for (auto& p : prec) p /= total;
  return prec;
}

Vec combine_scores(std::span<const Vec> scores, std::span<const double> weights) {
  if (scores.empty() || scores.size() != weights.size()) throw Error("combine_scores: bad view count");
  Vec out = weights[0] * scores[0];
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].size() != out.size()) throw Error("combine_scores: dimension mismatch");
    out += weights[i] * scores[i];
  }
  return out;
}

namespace {

ViewStep langevin_step(const Vec& z_t, int t, const Vec& score, double variance, const NoiseSchedule& sched,
                       RandomStream& rng) {
  ViewStep step;
  step.variance = variance;
  step.mean = (z_t + sched.beta(t) * score) / std::sqrt(sched.alpha(t));
  step.z0_hat = tweedie_estimate(z_t, score, sched, t);
  step.z_next = step.mean + std::sqrt(variance) * rng.normal_vector(z_t.size());
  return step;
}

}  // namespace

ViewStep conditional_reverse_step(const Vec& z_t, int t, const ScoreModel& view, const NoiseSchedule& sched,
                                  RandomStream& rng) {
  return langevin_step(z_t, t, view.score(z_t, sched, t), sched.beta(t), sched, rng);
}

ViewStep consistent_reverse_step(const Vec& z_t, int t, const ScoreModel& view1, const ScoreModel& view2,
                                 const NoiseSchedule& sched, const ViewWeightSchedule& vw, RandomStream& rng) {
  const double beta = sched.beta(t);
  const double nu = vw.nu(t);
  const double gamma = gamma_t(beta, nu);
  const Vec s = combine_scores(view1.score(z_t, sched, t), view2.score(z_t, sched, t), gamma);
  ViewStep step = langevin_step(z_t, t, s, combined_variance(beta, nu), sched, rng);
  step.gamma = gamma;
  return step;
}

}  // namespace latentdem
