#include "latentdem/em.hpp"

#include "latentdem/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <numbers>
#include <sstream>

namespace latentdem {

void SkipSchedule::validate(int steps) const {
  if (k < 1) throw Error("skip: K must be >= 1");
  if (s_t < 0 || s_t > steps) throw Error("skip: S_T must lie in [0, T]");
}

bool should_run_full(const SkipSchedule& sk, int t) { return (t > sk.s_t && t % sk.k == 0) || t <= sk.s_t; }

int count_skipped(const SkipSchedule& sk, int steps) {
  int m = 0;
  for (int t = 1; t <= steps; ++t) m += should_run_full(sk, t) ? 0 : 1;
  return m;
}

void EMConfig::validate() const {
  if (steps < 1) throw Error("config: steps must be >= 1");
  anneal.validate();
  skip.validate(steps);
  hqs.validate();
  if (!(sigma > 0.0)) throw Error("config: sigma must be positive");
  if (gluing < 0.0) throw Error("config: gluing weight must be non-negative");
  if (!(dc_scale > 0.0)) throw Error("config: dc_scale must be positive");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw Error("config: kernel size must be odd and positive");
  if (!(tau > 0.0)) throw Error("config: tau must be positive");
  if (!(nu_max >= 0.0)) throw Error("config: nu_max must be non-negative");
  if (pose_every < 1) throw Error("config: pose_every must be >= 1");
}

namespace {

void put_optional(std::ostream& os, const std::optional<double>& v) {
  if (v) os << *v;
}

Kernel initial_kernel(const EMConfig& cfg, const RandomStream& rng) {
  if (cfg.kernel_init == KernelInit::uniform) return Kernel::uniform(cfg.kernel_size);
  RandomStream r = rng.substream("kernel-init");
  Kernel k(cfg.kernel_size);
  for (auto& v : k.values) v = r.uniform();
  return simplex_project(k);
}

}  // namespace

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "t,zeta_t,gamma_t,residual,gluing,kernel_mse,pose_deg,skipped,stream_pos\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.t << ',' << r.zeta << ',';
    put_optional(os, r.gamma);
    os << ',';
    put_optional(os, r.residual);
    os << ',';
    put_optional(os, r.gluing);
    os << ',';
    put_optional(os, r.kernel_mse);
    os << ',';
    put_optional(os, r.pose_deg);
    os << ',' << (r.skipped ? 1 : 0) << ',' << r.stream_pos << '\n';
  }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_trace_csv(f, rows);
  if (!f) throw Error("write failed: " + path);
}

std::unique_ptr<Denoiser> make_denoiser(const std::string& name) {
  if (name == "projection") return std::make_unique<ProjectionDenoiser>();
  if (name == "gaussian") return std::make_unique<GaussianSmoothingDenoiser>();
  throw Error("unknown denoiser '" + name + "' (expected projection or gaussian)");
}

DeblurResult run_blind_deblur(const EMConfig& cfg, const Image& y, const ScoreModel& prior, const LinearCodec& codec,
                              const DeblurOptions& opts) {
  cfg.validate();
  if (prior.dim() != codec.latent_dim()) throw Error("deblur: prior and codec latent sizes differ");
  if (y.rows != codec.rows() || y.cols != codec.cols()) throw Error("deblur: observation shape does not match codec");
  if (opts.fixed_kernel && opts.fixed_kernel->size != cfg.kernel_size) throw Error("deblur: fixed kernel size mismatch");

  const NoiseSchedule sched = cfg.schedule();
  const EStepConfig ecfg = cfg.estep();
  HQSConfig hqs = cfg.hqs;
  hqs.sigma = cfg.sigma;
  const auto denoiser = make_denoiser(cfg.denoiser);

  RandomStream rng(cfg.seed, opts.stream);
  Vec z = rng.normal_vector(codec.latent_dim());

  DeblurResult res;
  res.initial_kernel = opts.fixed_kernel ? *opts.fixed_kernel : initial_kernel(cfg, rng);
  res.kernel = res.initial_kernel;
  res.trace.reserve(static_cast<std::size_t>(cfg.steps));
  bool first_full = true;
  Vec last_z0;

  for (int t = cfg.steps; t >= 1; --t) {
    PriorStep step = prior_reverse_step(z, t, prior, sched, rng);
    const bool full = opts.ignore_skip || should_run_full(cfg.skip, t);
    TraceRow row;
    row.t = t;
    row.zeta = annealing_factor(ecfg.anneal, t);
    row.skipped = !full;
    if (full) {
      const Image x0 = codec.decode(step.z0_hat);
      if (first_full) {
        res.initial_residual = (convolve(x0, res.kernel).pixels - y.pixels).norm();
        first_full = false;
      }
      if (!opts.fixed_kernel) {
        try {
          res.kernel = estimate_kernel(y, x0, res.kernel, hqs, *denoiser);
        } catch (const SingularDivision& e) {
          throw SingularDivision("M-step at t=" + std::to_string(t) + ": " + e.what());
        }
      }
      const ConvolutionOperator op(res.kernel, y.rows, y.cols, cfg.sigma);
      const GuidanceInfo g = apply_guidance(step, y, op, codec, prior, sched, ecfg);
      row.residual = g.residual_norm;
      if (ecfg.gluing_weight > 0.0) row.gluing = g.gluing_value;
      if (opts.truth) row.kernel_mse = mse_grid(res.kernel, *opts.truth);
    } else {
      ++res.skipped_steps;
    }
    row.stream_pos = rng.position();
    res.trace.push_back(row);
    last_z0 = std::move(step.z0_hat);
    z = std::move(step.z_next);
  }

  res.x0 = codec.decode(last_z0);
  res.final_residual = (convolve(res.x0, res.kernel).pixels - y.pixels).norm();
  return res;
}

Image run_latent_dps(const EMConfig& cfg, const Image& y, const ForwardOperator& op, const ScoreModel& prior,
                     const LinearCodec& codec, const std::string& stream) {
  if (prior.dim() != codec.latent_dim()) throw Error("dps: prior and codec latent sizes differ");
  const NoiseSchedule sched = cfg.schedule();
  RandomStream rng(cfg.seed, stream);
  Vec z = rng.normal_vector(codec.latent_dim());
  EStepState state{std::move(z), cfg.steps, std::nullopt, rng};
  while (state.t >= 1) state = dps_reverse_step(std::move(state), y, op, codec, prior, sched, cfg.dc_scale);
  return *state.x0_hat;
}

PosefreeResult run_posefree(const EMConfig& cfg, const Image& y1, const PoseParam& phi1, const Image& y2,
                            const LinearCodec& codec, const PosefreeOptions& opts) {
  cfg.validate();
  require_same_shape(y1, y2, "posefree");
  const NoiseSchedule sched = cfg.schedule();
  const ViewWeightSchedule vw{cfg.nu_max, cfg.steps};
  RandomStream rng(cfg.seed, opts.stream);
  Vec z = rng.normal_vector(codec.latent_dim());

  PosefreeResult res;
  res.trace.reserve(static_cast<std::size_t>(cfg.steps));
  Vec last_z0;
  for (int t = cfg.steps; t >= 1; --t) {
    const ConditionalViewPrior v1(codec, y1, phi1, cfg.tau);
    const ConditionalViewPrior v2(codec, y2, res.phi2, cfg.tau);
    ViewStep step = consistent_reverse_step(z, t, v1, v2, sched, vw, rng);
    TraceRow row;
    row.t = t;
    row.gamma = step.gamma;
    if (opts.pose_mstep && (t % cfg.pose_every == 0 || t == 1)) {
      const Image x0 = codec.decode(step.z0_hat);
      const LambdaDelta ld = lambda_delta_schedule(t, cfg.steps, cfg.ratio_start);
      res.phi2 = estimate_pose(y2, x0, y1, phi1, res.phi2, ld.lambda, ld.delta, cfg.pose, codec).pose;
    } else {
      row.skipped = true;
    }
    row.pose_deg = res.phi2.angle * 180.0 / std::numbers::pi;
    row.stream_pos = rng.position();
    res.trace.push_back(row);
    last_z0 = std::move(step.z0_hat);
    z = std::move(step.z_next);
  }
  res.synth = codec.decode(last_z0);
  return res;
}

Image run_single_view(const EMConfig& cfg, const Image& y1, const PoseParam& phi1, const LinearCodec& codec,
                      const std::string& stream) {
  const NoiseSchedule sched = cfg.schedule();
  RandomStream rng(cfg.seed, stream);
  Vec z = rng.normal_vector(codec.latent_dim());
  const ConditionalViewPrior v1(codec, y1, phi1, cfg.tau);
  Vec last_z0;
  for (int t = cfg.steps; t >= 1; --t) {
    ViewStep step = conditional_reverse_step(z, t, v1, sched, rng);
    last_z0 = std::move(step.z0_hat);
    z = std::move(step.z_next);
  }
  return codec.decode(last_z0);
}

}  // namespace latentdem
