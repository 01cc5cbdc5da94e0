#pragma once

#include "latentdem/prior.hpp"
#include "latentdem/rng.hpp"
#include "latentdem/sched.hpp"

#include <span>
#include <vector>

namespace latentdem {

/// Pose-model error scale nu_t; linear decay nu_t = nu_max * t / T.
struct ViewWeightSchedule {
  double nu_max = 1.0;
  int steps = 1000;

  [[nodiscard]] double nu(int t) const;
};

/// beta / (2 beta + nu^2); 0 when nu is infinite.
double gamma_t(double beta_t, double nu_t);

/// (1 - gamma) s1 + gamma s2.
Vec combine_scores(const Vec& s1, const Vec& s2, double gamma);

/// Variance of the product of N(., beta) and N(., beta + nu^2):
/// beta (beta + nu^2) / (2 beta + nu^2); beta when nu is infinite.
double combined_variance(double beta_t, double nu_t);

/// Precision weights for n views: view 0 is the reference with variance
/// beta, view i has beta + nu_i^2 (nus[0] is ignored). Weights sum to one.
std::vector<double> view_weights(double beta_t, std::span<const double> nus);
Vec combine_scores(std::span<const Vec> scores, std::span<const double> weights);

struct ViewStep {
  Vec z_next;
  /// Deterministic part of the transition.
  Vec mean;
  /// Tweedie estimate from the combined score.
  Vec z0_hat;
  double gamma = 0.0;
  double variance = 0.0;
};

/// Single-view conditional step: z_{t-1} = (z + beta s)/sqrt(alpha) + sqrt(beta) eps.
ViewStep conditional_reverse_step(const Vec& z_t, int t, const ScoreModel& view, const NoiseSchedule& sched,
                                  RandomStream& rng);

/// View-consistent step on the shared latent: combined score with gamma_t,
/// combined transition variance. The result is adopted by both trajectories.
ViewStep consistent_reverse_step(const Vec& z_t, int t, const ScoreModel& view1, const ScoreModel& view2,
                                 const NoiseSchedule& sched, const ViewWeightSchedule& vw, RandomStream& rng);

}  // namespace latentdem
