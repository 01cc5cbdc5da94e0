#pragma once

#include "latentdem/codec.hpp"
#include "latentdem/forward.hpp"
#include "latentdem/prior.hpp"
#include "latentdem/rng.hpp"
#include "latentdem/sched.hpp"

#include <optional>

namespace latentdem {

/// Piecewise-linear down-weighting of the data term: zeta_start at and above
/// t_start, zeta_end at and below t_end, linear in between.
struct AnnealSchedule {
  int t_start = 1000;
  double zeta_start = 10.0;
  int t_end = 600;
  double zeta_end = 1.0;

  void validate() const;
  static AnnealSchedule constant(double zeta = 1.0) { return {1, zeta, 0, zeta}; }
};

double annealing_factor(const AnnealSchedule& a, int t);

/// zeta implied by a modeling-error std nu on top of observation noise sigma.
double zeta_from_model_noise(double nu, double sigma);

struct EStepConfig {
  AnnealSchedule anneal;
  double gluing_weight = 0.0;
  /// Global multiplier on the data-consistency step (1 = literal coefficient).
  double dc_scale = 1.0;
};

struct EStepState {
  Vec z;
  int t = 0;
  /// decode(z0_hat) from the step that produced `z`.
  std::optional<Image> x0_hat;
  RandomStream rng;
};

/// The unconditional part of one reverse step, kept separate so the EM
/// driver can run the M-step between the prior update and the guidance.
struct PriorStep {
  int t;
  Vec z_t;
  Vec score;
  Vec z0_hat;
  Vec z_next;
};

PriorStep prior_reverse_step(const Vec& z_t, int t, const ScoreModel& model, const NoiseSchedule& sched,
                             RandomStream& rng);

/// d z0_hat / d z_t. Uses the model Jacobian when available, otherwise the
/// stop-gradient form I / sqrt(alpha_bar).
Mat tweedie_jacobian(const ScoreModel& model, const Vec& z_t, const NoiseSchedule& sched, int t);

/// Gradient w.r.t. z_t of dc_scale/(2 zeta sigma^2) |y - A(decode(z0_hat(z_t)))|^2.
Vec data_consistency_gradient(const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                              const ScoreModel& model, const NoiseSchedule& sched, const Vec& z_t, int t,
                              double zeta, double dc_scale = 1.0);

struct GuidanceInfo {
  double zeta = 1.0;
  double residual_norm = 0.0;
  double gluing_value = 0.0;
  Image x0_hat;
};

/// Subtracts the annealed data-consistency gradient and gamma times the
/// gluing gradient from step.z_next.
GuidanceInfo apply_guidance(PriorStep& step, const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                            const ScoreModel& model, const NoiseSchedule& sched, const EStepConfig& cfg);

struct StepInfo {
  int t = 0;
  bool skipped = false;
  double zeta = 1.0;
  double residual_norm = 0.0;
  double gluing_value = 0.0;
};

/// One annealed latent DPS reverse step. With run_full = false only the prior
/// step runs (one noise draw, no decode, no gluing).
EStepState estep_reverse_step(EStepState state, const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                              const ScoreModel& model, const NoiseSchedule& sched, const EStepConfig& cfg,
                              bool run_full, StepInfo* info = nullptr);

/// Plain latent DPS step: literal coefficient 1/(2 sigma^2), no annealing,
/// no gluing.
EStepState dps_reverse_step(EStepState state, const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                            const ScoreModel& model, const NoiseSchedule& sched, double dc_scale = 1.0);

}  // namespace latentdem
