#include "latentdem/estep.hpp"

#include <cmath>
#include <string>

namespace latentdem {

void AnnealSchedule::validate() const {
  if (!(zeta_start >= zeta_end && zeta_end >= 1.0)) throw Error("anneal: need zeta_start >= zeta_end >= 1");
  if (!(t_start > t_end)) throw Error("anneal: need t_start > t_end");
}

double annealing_factor(const AnnealSchedule& a, int t) {
  if (t >= a.t_start) return a.zeta_start;
  if (t <= a.t_end) return a.zeta_end;
  const double frac = static_cast<double>(t - a.t_end) / static_cast<double>(a.t_start - a.t_end);
  return a.zeta_end + (a.zeta_start - a.zeta_end) * frac;
}

double zeta_from_model_noise(double nu, double sigma) {
  if (!(sigma > 0.0)) throw Error("zeta_from_model_noise: sigma must be positive");
  if (nu < 0.0) throw Error("zeta_from_model_noise: nu must be non-negative");
  return (nu * nu + sigma * sigma) / (sigma * sigma);
}

PriorStep prior_reverse_step(const Vec& z_t, int t, const ScoreModel& model, const NoiseSchedule& sched,
                             RandomStream& rng) {
  if (t < 1) throw Error("reverse step: t must be >= 1, got " + std::to_string(t));
  PriorStep step{t, z_t, model.score(z_t, sched, t), Vec(), Vec()};
  if (step.score.size() != z_t.size()) throw Error("reverse step: score dimension mismatch");
  step.z0_hat = tweedie_estimate(z_t, step.score, sched, t);
  const ReverseCoeffs c = reverse_coeffs(sched, t);
  const Vec eps = rng.normal_vector(z_t.size());
  step.z_next = c.c_z * z_t + c.c_0 * step.z0_hat + c.sigma_tilde * eps;
  return step;
}

Mat tweedie_jacobian(const ScoreModel& model, const Vec& z_t, const NoiseSchedule& sched, int t) {
  const double ab = sched.alpha_bar(t);
  const Eigen::Index n = z_t.size();
  if (auto js = model.score_jacobian(z_t, sched, t)) {
    return (Mat::Identity(n, n) + (1.0 - ab) * *js) / std::sqrt(ab);
  }
  return Mat::Identity(n, n) / std::sqrt(ab);
}

namespace {

struct DataTerm {
  Vec grad_z;
  double residual_norm;
  Mat jacobian;
  Image x0_hat;
};

// Gradient of the data term w.r.t. z_t, given z0_hat(z_t).
DataTerm data_term(const Image& y, const ForwardOperator& op, const LinearCodec& codec, const ScoreModel& model,
                   const NoiseSchedule& sched, const Vec& z_t, const Vec& z0_hat, int t, double zeta,
                   double dc_scale) {
  const double sigma = op.sigma();
  if (!(sigma > 0.0)) throw Error("data consistency: observation sigma must be positive");
  Image x0 = codec.decode(z0_hat);
  require_same_shape(x0, y, "data consistency");
  const Vec residual = op.apply(x0).pixels - y.pixels;
  const Image back = op.adjoint(Image(y.rows, y.cols, residual));
  const Vec g_z0 = codec.is_identity() ? back.pixels : Vec(codec.decode_matrix().transpose() * back.pixels);
  Mat jac = tweedie_jacobian(model, z_t, sched, t);
  const double coeff = dc_scale / (zeta * sigma * sigma);
  Vec grad = coeff * (jac.transpose() * g_z0);
  return {std::move(grad), residual.norm(), std::move(jac), std::move(x0)};
}

}  // namespace

Vec data_consistency_gradient(const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                              const ScoreModel& model, const NoiseSchedule& sched, const Vec& z_t, int t,
                              double zeta, double dc_scale) {
  const Vec s = model.score(z_t, sched, t);
  const Vec z0 = tweedie_estimate(z_t, s, sched, t);
  return data_term(y, op, codec, model, sched, z_t, z0, t, zeta, dc_scale).grad_z;
}

GuidanceInfo apply_guidance(PriorStep& step, const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                            const ScoreModel& model, const NoiseSchedule& sched, const EStepConfig& cfg) {
  GuidanceInfo info;
  info.zeta = annealing_factor(cfg.anneal, step.t);
  DataTerm dt = data_term(y, op, codec, model, sched, step.z_t, step.z0_hat, step.t, info.zeta, cfg.dc_scale);
  step.z_next -= dt.grad_z;
  info.residual_norm = dt.residual_norm;
  if (cfg.gluing_weight > 0.0) {
    const GluingResult g = gluing_residual(codec, step.z0_hat, y, op);
    info.gluing_value = g.value;
    step.z_next -= cfg.gluing_weight * (dt.jacobian.transpose() * g.gradient);
  }
  info.x0_hat = std::move(dt.x0_hat);
  return info;
}

EStepState estep_reverse_step(EStepState state, const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                              const ScoreModel& model, const NoiseSchedule& sched, const EStepConfig& cfg,
                              bool run_full, StepInfo* info) {
  if (state.t < 1) throw Error("estep: state is already at t = 0");
  PriorStep step = prior_reverse_step(state.z, state.t, model, sched, state.rng);
  StepInfo local{state.t, !run_full, annealing_factor(cfg.anneal, state.t), 0.0, 0.0};
  if (run_full) {
    GuidanceInfo g = apply_guidance(step, y, op, codec, model, sched, cfg);
    local.residual_norm = g.residual_norm;
    local.gluing_value = g.gluing_value;
    state.x0_hat = std::move(g.x0_hat);
  }
  state.z = std::move(step.z_next);
  state.t -= 1;
  if (info != nullptr) *info = local;
  return state;
}

EStepState dps_reverse_step(EStepState state, const Image& y, const ForwardOperator& op, const LinearCodec& codec,
                            const ScoreModel& model, const NoiseSchedule& sched, double dc_scale) {
  if (state.t < 1) throw Error("dps: state is already at t = 0");
  PriorStep step = prior_reverse_step(state.z, state.t, model, sched, state.rng);
  DataTerm dt = data_term(y, op, codec, model, sched, step.z_t, step.z0_hat, step.t, 1.0, dc_scale);
  step.z_next -= dt.grad_z;
  state.x0_hat = std::move(dt.x0_hat);
  state.z = std::move(step.z_next);
  state.t -= 1;
  return state;
}

}  // namespace latentdem
