#pragma once

#include "latentdem/em.hpp"
#include "latentdem/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace latentdem {

inline constexpr int kConfigSchema = 1;

enum class Task { deblur, posefree };

struct RunConfig {
  int schema = kConfigSchema;
  Task task = Task::deblur;
  std::uint64_t seed = 0;
  int trials = 1;
  int jobs = 1;

  EMConfig em;
  SceneSpec scene;

  /// Directory written by `synth`; empty means synthesize in memory.
  std::string scene_dir;
  std::string out = "out";
  bool trace = false;
  /// Pose M-step on/off for the pose-free task.
  bool pose_mstep = true;

  std::vector<int> bench_k = {1, 8, 16};
  int bench_seeds = 5;
  /// Wall time per (seed, K) is the minimum over this many runs.
  int bench_repeats = 3;
};

/// Parses TOML text. Relative paths resolve against base_dir. Unknown keys,
/// a missing seed or a schema other than kConfigSchema are errors.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

std::string task_name(Task t);

}  // namespace latentdem
