#include "commands.hpp"

#include "latentdem/types.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("latentdem");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("LATENTDEM_LOG")) {
    const auto lvl = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept "off" when asked for.
    if (lvl != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(lvl);
    } else {
      spdlog::warn("ignoring unknown LATENTDEM_LOG level '{}'", env);
    }
  }
}

void add_run_flags(CLI::App* sub, latentdem::cli::RunFlags& f, std::string& seed, int& jobs) {
  sub->add_option("--config", f.config, "run configuration (TOML)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", seed, "seed override (u64)");
  sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_flag("--trace", f.trace, "write per-step trace CSV");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"latent-space diffusion EM for blind inverse problems"};
  app.require_subcommand(1);

  latentdem::cli::RunFlags flags;
  std::string seed;
  int jobs = 0;
  auto* deblur = app.add_subcommand("deblur", "blind deblurring");
  auto* posefree = app.add_subcommand("posefree", "pose-free view synthesis");
  auto* bench = app.add_subcommand("bench", "skip-schedule timing sweep");
  auto* synth = app.add_subcommand("synth", "write synthetic scenes");
  for (auto* sub : {deblur, posefree, bench, synth}) add_run_flags(sub, flags, seed, jobs);

  latentdem::cli::MetricsArgs margs;
  auto* metrics = app.add_subcommand("metrics", "compare an estimate with ground truth");
  metrics->add_option("estimate", margs.estimate)->required()->check(CLI::ExistingFile);
  metrics->add_option("truth", margs.truth)->required()->check(CLI::ExistingFile);
  metrics->add_option("--kernel-estimate", margs.kernel_estimate)->check(CLI::ExistingFile);
  metrics->add_option("--kernel-truth", margs.kernel_truth)->check(CLI::ExistingFile);
  metrics->add_option("--peak", margs.peak);

  latentdem::cli::OracleArgs oargs;
  auto* oracle = app.add_subcommand("oracle", "reference solvers");
  oracle->add_option("op", oargs.op, "simplex | hqs | pose")->required();
  oracle->add_option("--values", oargs.values, "entries for simplex");
  oracle->add_option("--images", oargs.paths, "image paths for hqs / pose");
  oracle->add_option("--kernel-size", oargs.kernel_size);
  oracle->add_option("--delta", oargs.delta);
  oracle->add_option("--sigma", oargs.sigma);
  oracle->add_option("--resolution", oargs.resolution_deg, "grid step in degrees");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!seed.empty()) {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(seed, &pos);
      if (pos != seed.size() || seed.front() == '-') throw std::invalid_argument(seed);
      flags.seed = v;
    }
  } catch (const std::exception&) {
    spdlog::error("--seed must be an unsigned 64-bit integer, got '{}'", seed);
    return 2;
  }
  if (jobs > 0) flags.jobs = jobs;

  try {
    if (deblur->parsed()) return latentdem::cli::cmd_deblur(flags);
    if (posefree->parsed()) return latentdem::cli::cmd_posefree(flags);
    if (bench->parsed()) return latentdem::cli::cmd_bench(flags);
    if (synth->parsed()) return latentdem::cli::cmd_synth(flags);
    if (metrics->parsed()) return latentdem::cli::cmd_metrics(margs);
    if (oracle->parsed()) return latentdem::cli::cmd_oracle(oargs);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
