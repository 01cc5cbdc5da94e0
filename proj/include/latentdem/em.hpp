#pragma once

#include "latentdem/codec.hpp"
#include "latentdem/estep.hpp"
#include "latentdem/forward.hpp"
#include "latentdem/mstep.hpp"
#include "latentdem/multiview.hpp"
#include "latentdem/prior.hpp"
#include "latentdem/sched.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace latentdem {

/// Full EM work runs when (t > S_T and K | t) or t <= S_T.
struct SkipSchedule {
  int s_t = 500;
  int k = 8;

  void validate(int steps) const;
};

bool should_run_full(const SkipSchedule& sk, int t);
/// |{t in 1..T : !should_run_full(t)}|
int count_skipped(const SkipSchedule& sk, int steps);

enum class KernelInit { uniform, random };

struct EMConfig {
  // Diffusion schedule.
  int steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;

  AnnealSchedule anneal;
  SkipSchedule skip;
  HQSConfig hqs;
  std::string denoiser = "projection";

  double sigma = 0.01;
  double gluing = 0.0;
  double dc_scale = 1.0;
  std::uint64_t seed = 0;

  int kernel_size = 5;
  KernelInit kernel_init = KernelInit::uniform;

  // Pose-free task.
  double tau = 0.1;
  double nu_max = 1.0;
  double ratio_start = 0.05;
  PoseOptions pose;
  int pose_every = 1;

  [[nodiscard]] NoiseSchedule schedule() const { return build_linear_schedule(steps, beta_min, beta_max); }
  [[nodiscard]] EStepConfig estep() const { return {anneal, gluing, dc_scale}; }
  void validate() const;
};

/// One row per reverse step. Optional fields are empty in the CSV.
struct TraceRow {
  int t = 0;
  double zeta = 1.0;
  std::optional<double> gamma;
  std::optional<double> residual;
  std::optional<double> gluing;
  std::optional<double> kernel_mse;
  std::optional<double> pose_deg;
  bool skipped = false;
  std::uint64_t stream_pos = 0;
};

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);

struct DeblurOptions {
  /// Stream name; trials use "trajectory-<i>".
  std::string stream = "trajectory-0";
  /// Replaces every M-step with this kernel.
  std::optional<Kernel> fixed_kernel;
  /// Runs every step in full without consulting the skip schedule.
  bool ignore_skip = false;
  /// Ground truth for kernel_mse trace entries.
  std::optional<Kernel> truth;
};

struct DeblurResult {
  Image x0;
  Kernel kernel;
  Kernel initial_kernel;
  std::vector<TraceRow> trace;
  /// |y - k_init * x0_hat| at the first full step.
  double initial_residual = 0.0;
  /// |y - k_final * x0|.
  double final_residual = 0.0;
  int skipped_steps = 0;
};

std::unique_ptr<Denoiser> make_denoiser(const std::string& name);

DeblurResult run_blind_deblur(const EMConfig& cfg, const Image& y, const ScoreModel& prior, const LinearCodec& codec,
                              const DeblurOptions& opts = {});

/// Non-blind latent DPS with a known operator (no annealing, gluing or skipping).
Image run_latent_dps(const EMConfig& cfg, const Image& y, const ForwardOperator& op, const ScoreModel& prior,
                     const LinearCodec& codec, const std::string& stream = "trajectory-0");

struct PosefreeOptions {
  std::string stream = "trajectory-0";
  bool pose_mstep = true;
};

struct PosefreeResult {
  Image synth;
  PoseParam phi2;
  std::vector<TraceRow> trace;
};

PosefreeResult run_posefree(const EMConfig& cfg, const Image& y1, const PoseParam& phi1, const Image& y2,
                            const LinearCodec& codec, const PosefreeOptions& opts = {});

/// Single-view conditional sampling on (y1, phi1).
Image run_single_view(const EMConfig& cfg, const Image& y1, const PoseParam& phi1, const LinearCodec& codec,
                      const std::string& stream = "trajectory-0");

}  // namespace latentdem
