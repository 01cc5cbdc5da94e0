#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace latentdem::cli {

/// Flags shared by the config-driven subcommands. Set fields override the
/// config file.
struct RunFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool trace = false;
};

int cmd_deblur(const RunFlags& flags);
int cmd_posefree(const RunFlags& flags);
int cmd_bench(const RunFlags& flags);
int cmd_synth(const RunFlags& flags);

struct MetricsArgs {
  std::string estimate;
  std::string truth;
  std::optional<std::string> kernel_estimate;
  std::optional<std::string> kernel_truth;
  double peak = 1.0;
};

/// Prints a metrics JSON object to stdout.
int cmd_metrics(const MetricsArgs& args);

struct OracleArgs {
  std::string op;  // simplex | hqs | pose
  std::vector<double> values;
  std::vector<std::string> paths;
  int kernel_size = 5;
  double delta = 5e6;
  double sigma = 0.01;
  double resolution_deg = 1.0;
};

int cmd_oracle(const OracleArgs& args);

}  // namespace latentdem::cli
