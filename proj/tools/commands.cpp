#include "commands.hpp"

#include "latentdem/config.hpp"
#include "latentdem/em.hpp"
#include "latentdem/metrics.hpp"
#include "latentdem/oracle.hpp"
#include "latentdem/scene.hpp"
#include "latentdem/simd.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace latentdem::cli {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

RunConfig load(const RunFlags& flags) {
  RunConfig cfg = load_config(flags.config);
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.em.seed = *flags.seed;
  }
  if (flags.jobs) {
    if (*flags.jobs < 1) throw Error("--jobs must be >= 1");
    cfg.jobs = *flags.jobs;
  }
  if (flags.out) cfg.out = *flags.out;
  cfg.trace = cfg.trace || flags.trace;
  return cfg;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path.string());
  return json::parse(f);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Runs task(i) for i in [0, n) on `jobs` threads. Returns the number of
/// failed tasks; failures are logged.
int run_pool(int n, int jobs, const std::function<void(int)>& task) {
  std::atomic<int> next{0}, failed{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (const std::exception& e) {
        spdlog::error("trial {}: {}", i, e.what());
        ++failed;
      }
    }
  };
  const int threads = std::max(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return failed.load();
}

fs::path scene_path(const RunConfig& cfg, int i) { return fs::path(cfg.scene_dir) / ("scene-" + std::to_string(i)); }

struct DeblurInput {
  Image y;
  std::optional<Image> x;
  std::optional<Kernel> kernel;
};

DeblurInput deblur_input(const RunConfig& cfg, const LatentModel& model, int i) {
  if (cfg.scene_dir.empty()) {
    DeblurScene s = synth_deblur_scene(cfg.scene, model, cfg.seed, i);
    return {std::move(s.y), std::move(s.x), std::move(s.kernel)};
  }
  const fs::path dir = scene_path(cfg, i);
  const fs::path y = dir / "y.ldemf32";
  if (!fs::exists(y)) throw Error("missing input file " + y.string());
  DeblurInput in{read_ldemf32(y.string()), std::nullopt, std::nullopt};
  if (fs::exists(dir / "x.ldemf32")) in.x = read_ldemf32((dir / "x.ldemf32").string());
  if (fs::exists(dir / "kernel.txt")) in.kernel = read_kernel((dir / "kernel.txt").string());
  return in;
}

template <class F>
double timed_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int cmd_deblur(const RunFlags& flags) {
  const RunConfig cfg = load(flags);
  if (cfg.task != Task::deblur) throw Error("config task is '" + task_name(cfg.task) + "', expected deblur");
  const LatentModel model = build_model(cfg.scene, cfg.seed);
  fs::create_directories(cfg.out);
  spdlog::info("deblur: {} trial(s), {} job(s), seed {}, simd {}", cfg.trials, cfg.jobs, cfg.seed,
               simd::isa_name(simd::active().isa));

  const int failed = run_pool(cfg.trials, cfg.jobs, [&](int i) {
    const DeblurInput in = deblur_input(cfg, model, i);
    DeblurOptions opts;
    opts.stream = "trajectory-" + std::to_string(i);
    opts.truth = in.kernel;
    DeblurResult r;
    const double ms = timed_ms([&] { r = run_blind_deblur(cfg.em, in.y, model.prior, model.codec, opts); });

    const fs::path dir = fs::path(cfg.out) / ("trial-" + std::to_string(i));
    fs::create_directories(dir);
    write_ldemf32((dir / "x0.ldemf32").string(), r.x0);
    write_pgm((dir / "x0.pgm").string(), r.x0);
    write_kernel((dir / "kernel.txt").string(), r.kernel);
    if (cfg.trace) write_trace_csv((dir / "trace.csv").string(), r.trace);

    json m;
    m["psnr"] = in.x ? json(psnr(r.x0, *in.x)) : json(nullptr);
    m["ssim"] = in.x ? json(ssim(r.x0, *in.x)) : json(nullptr);
    m["kernel_mse"] = in.kernel ? json(mse_grid(r.kernel, *in.kernel)) : json(nullptr);
    m["mnc"] = in.kernel ? json(mnc(r.kernel, *in.kernel)) : json(nullptr);
    m["wall_ms"] = ms;
    m["skipped_steps"] = r.skipped_steps;
    m["initial_residual"] = r.initial_residual;
    m["final_residual"] = r.final_residual;
    write_json(dir / "metrics.json", m);
    spdlog::info("trial {}: {:.0f} ms, residual {:.4g} -> {:.4g}", i, ms, r.initial_residual, r.final_residual);
  });
  if (failed > 0) spdlog::error("{} of {} trial(s) failed", failed, cfg.trials);
  return failed == 0 ? 0 : 1;
}

int cmd_posefree(const RunFlags& flags) {
  const RunConfig cfg = load(flags);
  if (cfg.task != Task::posefree) throw Error("config task is '" + task_name(cfg.task) + "', expected posefree");
  const LinearCodec codec = build_codec(cfg.scene, cfg.seed);
  fs::create_directories(cfg.out);

  const int failed = run_pool(cfg.trials, cfg.jobs, [&](int i) {
    Image y1, y2;
    PoseParam phi1;
    std::optional<double> theta;
    if (cfg.scene_dir.empty()) {
      PoseScene s = synth_pose_scene(cfg.scene, cfg.seed, i);
      y1 = std::move(s.y1);
      y2 = std::move(s.y2);
      phi1 = s.phi1;
      theta = s.theta;
    } else {
      const fs::path dir = scene_path(cfg, i);
      for (const char* f : {"y1.ldemf32", "y2.ldemf32"})
        if (!fs::exists(dir / f)) throw Error("missing input file " + (dir / f).string());
      y1 = read_ldemf32((dir / "y1.ldemf32").string());
      y2 = read_ldemf32((dir / "y2.ldemf32").string());
      if (fs::exists(dir / "pose.json")) {
        const json p = read_json(dir / "pose.json");
        phi1 = PoseParam(p.value("phi1_deg", 0.0) / kDeg);
        if (p.contains("theta_deg")) theta = p["theta_deg"].get<double>() / kDeg;
      }
    }
    PosefreeOptions opts;
    opts.stream = "trajectory-" + std::to_string(i);
    opts.pose_mstep = cfg.pose_mstep;
    PosefreeResult r;
    const double ms = timed_ms([&] { r = run_posefree(cfg.em, y1, phi1, y2, codec, opts); });

    const fs::path dir = fs::path(cfg.out) / ("trial-" + std::to_string(i));
    fs::create_directories(dir);
    write_ldemf32((dir / "synth.ldemf32").string(), r.synth);
    write_pgm((dir / "synth.pgm").string(), r.synth);
    if (cfg.trace) write_trace_csv((dir / "trace.csv").string(), r.trace);
    json p;
    p["phi2_rad"] = r.phi2.angle;
    p["phi2_deg"] = r.phi2.angle * kDeg;
    p["error_deg"] = theta ? json(std::abs(PoseParam::angular_difference(r.phi2.angle, -*theta)) * kDeg)
                           : json(nullptr);
    p["wall_ms"] = ms;
    write_json(dir / "pose.json", p);
    spdlog::info("trial {}: phi2 = {:.2f} deg ({:.0f} ms)", i, r.phi2.angle * kDeg, ms);
  });
  return failed == 0 ? 0 : 1;
}

int cmd_bench(const RunFlags& flags) {
  const RunConfig cfg = load(flags);
  if (cfg.bench_k.empty()) {
    spdlog::error("bench: empty k_values sweep");
    return 2;
  }
  for (int k : cfg.bench_k)
    if (k < 1) throw Error("bench: k values must be >= 1");
  const LatentModel model = build_model(cfg.scene, cfg.seed);
  fs::create_directories(cfg.out);

  struct Row {
    int k, seed, skipped;
    double wall_ms, psnr, kernel_mse;
  };
  const int nk = static_cast<int>(cfg.bench_k.size());
  std::vector<Row> rows(static_cast<std::size_t>(nk * cfg.bench_seeds));
  std::vector<DeblurScene> scenes;
  for (int s = 0; s < cfg.bench_seeds; ++s) scenes.push_back(synth_deblur_scene(cfg.scene, model, cfg.seed, s));

  // Seed-major order keeps each seed's K values close together in time.
  const int failed = run_pool(static_cast<int>(rows.size()), cfg.jobs, [&](int idx) {
    const int s = idx / nk, k = cfg.bench_k[static_cast<std::size_t>(idx % nk)];
    EMConfig em = cfg.em;
    em.skip.k = k;
    const DeblurScene& sc = scenes[static_cast<std::size_t>(s)];
    DeblurOptions opts;
    opts.stream = "trajectory-" + std::to_string(s);
    DeblurResult r;
    double ms = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < cfg.bench_repeats; ++rep)
      ms = std::min(ms, timed_ms([&] { r = run_blind_deblur(em, sc.y, model.prior, model.codec, opts); }));
    rows[static_cast<std::size_t>(idx)] = {k, s, r.skipped_steps, ms, psnr(r.x0, sc.x), mse_grid(r.kernel, sc.kernel)};
    spdlog::info("bench K={} seed={}: {:.0f} ms", k, s, ms);
  });
  if (failed > 0) return 1;

  std::ofstream all(fs::path(cfg.out) / "bench_runs.csv");
  all << "method,k,s_t,skipped_steps,seed,running_time_ms,psnr,kernel_mse\n" << std::setprecision(10);
  for (const auto& r : rows) {
    all << "K=" << r.k << ',' << r.k << ',' << cfg.em.skip.s_t << ',' << r.skipped << ',' << r.seed << ','
        << r.wall_ms << ',' << r.psnr << ',' << r.kernel_mse << '\n';
  }
  std::ofstream table(fs::path(cfg.out) / "bench.csv");
  table << "method,skipped_steps,running_time_ms,psnr,kernel_mse\n" << std::setprecision(10);
  for (int k : cfg.bench_k) {
    std::vector<double> t, p, m;
    int skipped = 0;
    for (const auto& r : rows) {
      if (r.k != k) continue;
      t.push_back(r.wall_ms);
      p.push_back(r.psnr);
      m.push_back(r.kernel_mse);
      skipped = r.skipped;
    }
    table << "K=" << k << ',' << skipped << ',' << median(t) << ',' << median(p) << ',' << median(m) << '\n';
  }
  spdlog::info("bench: wrote {}", (fs::path(cfg.out) / "bench.csv").string());
  return 0;
}

int cmd_synth(const RunFlags& flags) {
  const RunConfig cfg = load(flags);
  fs::create_directories(cfg.out);
  std::optional<LatentModel> model;
  if (cfg.task == Task::deblur) model = build_model(cfg.scene, cfg.seed);
  for (int i = 0; i < cfg.scene.count; ++i) {
    const fs::path dir = fs::path(cfg.out) / ("scene-" + std::to_string(i));
    fs::create_directories(dir);
    json meta;
    meta["seed"] = cfg.seed;
    meta["index"] = i;
    meta["task"] = task_name(cfg.task);
    if (cfg.task == Task::deblur) {
      const DeblurScene s = synth_deblur_scene(cfg.scene, *model, cfg.seed, i);
      write_ldemf32((dir / "x.ldemf32").string(), s.x);
      write_pgm((dir / "x.pgm").string(), s.x);
      write_ldemf32((dir / "y.ldemf32").string(), s.y);
      write_pgm((dir / "y.pgm").string(), s.y);
      write_kernel((dir / "kernel.txt").string(), s.kernel);
      meta["noise_sigma"] = cfg.scene.noise_sigma;
      meta["kernel_spec"] = cfg.scene.kernel;
    } else {
      const PoseScene s = synth_pose_scene(cfg.scene, cfg.seed, i);
      write_ldemf32((dir / "y1.ldemf32").string(), s.y1);
      write_pgm((dir / "y1.pgm").string(), s.y1);
      write_ldemf32((dir / "y2.ldemf32").string(), s.y2);
      write_pgm((dir / "y2.pgm").string(), s.y2);
      json pose;
      pose["phi1_deg"] = s.phi1.angle * kDeg;
      pose["theta_deg"] = s.theta * kDeg;
      write_json(dir / "pose.json", pose);
    }
    write_json(dir / "scene.json", meta);
  }
  spdlog::info("synth: wrote {} scene(s) to {}", cfg.scene.count, cfg.out);
  return 0;
}

int cmd_metrics(const MetricsArgs& args) {
  const Image a = read_image(args.estimate);
  const Image b = read_image(args.truth);
  const MetricReport r = compare_images(a, b, args.peak);
  json m;
  m["psnr"] = r.psnr_db;
  m["ssim"] = r.ssim;
  m["mse"] = r.mse;
  m["kernel_mse"] = nullptr;
  m["mnc"] = nullptr;
  if (args.kernel_estimate.has_value() != args.kernel_truth.has_value())
    throw Error("metrics: pass both kernel paths or neither");
  if (args.kernel_estimate) {
    const Kernel ke = read_kernel(*args.kernel_estimate), kt = read_kernel(*args.kernel_truth);
    m["kernel_mse"] = mse_grid(ke, kt);
    m["mnc"] = mnc(ke, kt);
  }
  std::cout << m.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const OracleArgs& args) {
  json out;
  if (args.op == "simplex") {
    if (args.values.empty() || args.values.size() > 16) throw Error("oracle simplex: give 1..16 values");
    out["projection"] = oracle::simplex_project_bruteforce(args.values);
  } else if (args.op == "hqs") {
    if (args.paths.size() != 2) throw Error("oracle hqs: expects <y> <x0_hat> image paths");
    const Image y = read_image(args.paths[0]), x = read_image(args.paths[1]);
    HQSConfig cfg;
    cfg.delta = args.delta;
    cfg.sigma = args.sigma;
    const Kernel k = oracle::dense_hqs_solve(y, x, Kernel::uniform(args.kernel_size), cfg);
    out["kernel"] = k.values;
    out["size"] = k.size;
  } else if (args.op == "pose") {
    if (args.paths.size() != 3) throw Error("oracle pose: expects <y2> <x0_hat> <y1> image paths");
    const Image y2 = read_image(args.paths[0]), x0 = read_image(args.paths[1]), y1 = read_image(args.paths[2]);
    const auto codec = LinearCodec::identity(y2.rows, y2.cols);
    const PoseLoss loss(y2, x0, y1, PoseParam(0.0), 1.0, 1.0, codec);
    const auto g = oracle::pose_grid_search([&](double a) { return loss(a); }, args.resolution_deg);
    out["angle_deg"] = g.pose.angle * kDeg;
    out["loss"] = g.loss;
    out["flat"] = g.flat;
  } else {
    throw Error("oracle: unknown operation '" + args.op + "' (expected simplex, hqs or pose)");
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace latentdem::cli
