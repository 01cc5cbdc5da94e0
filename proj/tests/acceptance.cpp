#include "commands.hpp"
#include "latentdem/config.hpp"
#include "latentdem/em.hpp"
#include "latentdem/metrics.hpp"
#include "latentdem/oracle.hpp"
#include "latentdem/scene.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace latentdem;
namespace fs = std::filesystem;

#ifndef LATENTDEM_SOURCE_DIR
#define LATENTDEM_SOURCE_DIR "."
#endif

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const fs::path kConfigs = fs::path(LATENTDEM_SOURCE_DIR) / "configs";
const fs::path kWork = fs::current_path() / "acceptance_out";

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / b.norm(); }

Image random_image(int n, RandomStream& rng) {
  Image x(n, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.pixels[i] = rng.uniform();
  return x;
}

Kernel random_kernel(int k, RandomStream& rng) {
  Kernel out(k);
  for (double& v : out.values) v = rng.uniform();
  const double s = out.sum();
  for (double& v : out.values) v /= s;
  return out;
}

/// y = A x for an arbitrary dense A on 2x4 images.
class DenseOperator final : public ForwardOperator {
 public:
  DenseOperator(Mat a, int rows, int cols, double sigma)
      : ForwardOperator(sigma), a_(std::move(a)), rows_(rows), cols_(cols) {}
  [[nodiscard]] OperatorKind kind() const override { return OperatorKind::identity; }
  [[nodiscard]] Image apply(const Image& x) const override { return Image(rows_, cols_, a_ * x.pixels); }
  [[nodiscard]] Image adjoint(const Image& y) const override {
    return Image(rows_, cols_, a_.transpose() * y.pixels);
  }

 private:
  Mat a_;
  int rows_, cols_;
};

Outcome hqs_equivalence() {
  RandomStream rng(101, "acceptance-hqs");
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Image y = random_image(8, rng), x = random_image(8, rng);
    const Kernel prev = random_kernel(i % 2 == 0 ? 3 : 5, rng);
    HQSConfig cfg;
    cfg.delta = i < 10 ? 5e6 : 1e3 * (1.0 + rng.uniform());
    cfg.sigma = 0.01 + 0.1 * rng.uniform();
    const Image fast = hqs_data_update_full(y, x, prev, cfg);
    const Image dense = oracle::dense_hqs_solve_full(y, x, prev, cfg);
    worst = std::max(worst, rel(fast.pixels, dense.pixels));
  }
  const double s = seconds_since(t0);
  return {worst <= 1e-8 && s < 1.0, fmt("max rel err %.3g, %.3f s", worst, s)};
}

Outcome posterior_mean() {
  constexpr int n = 8;
  constexpr double sigma = 0.1;
  RandomStream rng(202, "acceptance-lg");
  Mat a = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) += 0.3 * rng.normal() / std::sqrt(double(n));
  const Vec mu = rng.normal_vector(n);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
  Vec eig(n);
  for (int i = 0; i < n; ++i) eig[i] = 0.5 + 1.5 * rng.uniform();
  const Mat cov = q * eig.asDiagonal() * q.transpose();
  const Eigen::LLT<Mat> chol(cov);
  const Vec x = mu + chol.matrixL() * rng.normal_vector(n);
  const Vec yv = a * x + sigma * rng.normal_vector(n);

  const auto t0 = std::chrono::steady_clock::now();
  const GaussianPrior prior(mu, cov);
  const LinearCodec codec = LinearCodec::identity(2, 4);
  const DenseOperator op(a, 2, 4, sigma);
  const Image y(2, 4, yv);
  EMConfig cfg;
  cfg.steps = 200;
  cfg.beta_min = 5e-4;
  cfg.beta_max = 0.1;
  cfg.sigma = sigma;
  // Guidance step normalized by the operator: dc_scale = sigma^2 / |A|_2^2.
  const double a_norm = Eigen::JacobiSVD<Mat>(a).singularValues()[0];
  cfg.dc_scale = sigma * sigma / (a_norm * a_norm);
  Vec mean = Vec::Zero(n);
  constexpr int seeds = 256;
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    mean += run_latent_dps(cfg, y, op, prior, codec, "trajectory-0").pixels;
  }
  mean /= seeds;
  const double secs = seconds_since(t0);
  const auto post = oracle::analytic_gaussian_posterior(mu, cov, a, yv, sigma);
  const double err = rel(mean, post.mean);
  return {err <= 0.10 && secs < 30.0,
          fmt("rel err %.4f (prior mean at %.3f), %.1f s", err, rel(mu, post.mean), secs)};
}

RunConfig deblur_config() { return load_config((kConfigs / "deblur.toml").string()); }

Outcome reductions() {
  const RunConfig rc = deblur_config();
  const LatentModel model = build_model(rc.scene, rc.seed);
  const DeblurScene scene = synth_deblur_scene(rc.scene, model, rc.seed, 0);

  EMConfig k1 = rc.em;
  k1.skip.k = 1;
  const DeblurResult a = run_blind_deblur(k1, scene.y, model.prior, model.codec);
  DeblurOptions no_skip;
  no_skip.ignore_skip = true;
  const DeblurResult b = run_blind_deblur(k1, scene.y, model.prior, model.codec, no_skip);
  const bool ka = a.x0.pixels == b.x0.pixels && a.kernel.values == b.kernel.values && a.skipped_steps == 0;

  EMConfig plain = rc.em;
  plain.anneal = AnnealSchedule::constant(1.0);
  plain.gluing = 0.0;
  plain.skip = {plain.steps, 1};
  DeblurOptions fixed;
  fixed.fixed_kernel = scene.kernel;
  const DeblurResult c = run_blind_deblur(plain, scene.y, model.prior, model.codec, fixed);
  const ConvolutionOperator op(scene.kernel, rc.scene.size, rc.scene.size, plain.sigma);
  const Image d = run_latent_dps(plain, scene.y, op, model.prior, model.codec);
  const bool kb = c.x0.pixels == d.pixels;
  return {ka && kb, fmt("(a) K=1 vs no-skip %s, (b) fixed kernel vs latent DPS %s", ka ? "identical" : "differ",
                        kb ? "identical" : "differ")};
}

Outcome skip_count() {
  const int n = count_skipped({500, 8}, 1000);
  const RunConfig rc = deblur_config();
  const LatentModel model = build_model(rc.scene, rc.seed);
  const DeblurScene scene = synth_deblur_scene(rc.scene, model, rc.seed, 0);
  EMConfig cfg = rc.em;
  cfg.skip = {500, 8};
  cfg.steps = 1000;
  const DeblurResult r = run_blind_deblur(cfg, scene.y, model.prior, model.codec);
  const auto traced = std::count_if(r.trace.begin(), r.trace.end(), [](const TraceRow& row) { return row.skipped; });
  return {n == 437 && r.skipped_steps == 437 && traced == 437,
          fmt("counted %d, run reported %d, trace marked %d", n, r.skipped_steps, int(traced))};
}

Outcome anneal_values() {
  const AnnealSchedule a;
  const double z1000 = annealing_factor(a, 1000), z600 = annealing_factor(a, 600);
  const double z800 = annealing_factor(a, 800), z300 = annealing_factor(a, 300);
  const bool ok = std::abs(z1000 - 10.0) < 1e-12 && std::abs(z600 - 1.0) < 1e-12 && std::abs(z800 - 5.5) < 1e-12 &&
                  std::abs(z300 - 1.0) < 1e-12;
  return {ok, fmt("zeta(1000)=%g zeta(600)=%g zeta(800)=%g zeta(300)=%g", z1000, z600, z800, z300)};
}

Outcome blind_deblur() {
  RunConfig rc = deblur_config();
  std::vector<double> finals;
  bool every = true;
  double worst_secs = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    rc.em.seed = seed;
    const LatentModel model = build_model(rc.scene, seed);
    const DeblurScene scene = synth_deblur_scene(rc.scene, model, seed, 0);
    const auto t0 = std::chrono::steady_clock::now();
    const DeblurResult r = run_blind_deblur(rc.em, scene.y, model.prior, model.codec);
    worst_secs = std::max(worst_secs, seconds_since(t0));
    const double m0 = mnc(r.initial_kernel, scene.kernel), m1 = mnc(r.kernel, scene.kernel);
    finals.push_back(m1);
    const bool ok = m1 > m0 && r.final_residual < r.initial_residual;
    if (!ok) {
      std::printf("  seed %llu: mnc %.4f -> %.4f, residual %.4f -> %.4f\n", static_cast<unsigned long long>(seed), m0,
                  m1, r.initial_residual, r.final_residual);
    }
    every = every && ok;
  }
  std::vector<double> sorted = finals;
  std::sort(sorted.begin(), sorted.end());
  const double med = 0.5 * (sorted[4] + sorted[5]);
  return {med >= 0.8 && every && worst_secs < 120.0,
          fmt("10 seeds, median MNC %.4f, min %.4f, all improved: %s, slowest %.1f s", med, sorted.front(),
              every ? "yes" : "no", worst_secs)};
}

Outcome view_consistent() {
  const double b = 0.02;
  const bool spots = gamma_t(b, 0.0) == 0.5 && std::abs(gamma_t(b, std::sqrt(b)) - 1.0 / 3.0) < 1e-15 &&
                     gamma_t(b, 1e4) < 1e-9 && gamma_t(b, std::numeric_limits<double>::infinity()) == 0.0;

  // Score of the normalized product p1^(1-g) p2^g of the diffused Gaussians.
  RandomStream rng(303, "acceptance-mv");
  const auto sched = build_linear_schedule(100, 1e-4, 0.02);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Mat g1(4, 4), g2(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        g1(i, j) = rng.normal();
        g2(i, j) = rng.normal();
      }
    const Mat c1 = g1 * g1.transpose() + 0.5 * Mat::Identity(4, 4);
    const Mat c2 = g2 * g2.transpose() + 0.5 * Mat::Identity(4, 4);
    const GaussianPrior p1(rng.normal_vector(4), c1), p2(rng.normal_vector(4), c2);
    for (int t : {1, 50, 100}) {
      const double ab = sched.alpha_bar(t), g = rng.uniform();
      const Mat m1 = (ab * c1 + (1 - ab) * Mat::Identity(4, 4)).inverse();
      const Mat m2 = (ab * c2 + (1 - ab) * Mat::Identity(4, 4)).inverse();
      const Mat prec = (1 - g) * m1 + g * m2;
      const Vec centre =
          prec.ldlt().solve((1 - g) * m1 * (std::sqrt(ab) * p1.mean()) + g * m2 * (std::sqrt(ab) * p2.mean()));
      const Vec z = rng.normal_vector(4);
      const Vec expected = -prec * (z - centre);
      worst = std::max(worst, (combine_scores(p1.score(z, sched, t), p2.score(z, sched, t), g) - expected).norm());
    }
  }

  // Two Gaussian views, nu = 0: terminal samples should centre on the product posterior.
  const LinearCodec codec = LinearCodec::identity(2, 2);
  const double tau = 0.3;
  Image r1(2, 2), r2(2, 2);
  for (Eigen::Index i = 0; i < 4; ++i) {
    r1.pixels[i] = 1.0 + rng.normal();
    r2.pixels[i] = 1.0 + rng.normal();
  }
  const ConditionalViewPrior v1(codec, r1, PoseParam(0.0), tau), v2(codec, r2, PoseParam(0.0), tau);
  const auto s200 = build_linear_schedule(200, 5e-4, 0.1);
  const ViewWeightSchedule vw{0.0, 200};
  Vec mean = Vec::Zero(4);
  for (int seed = 0; seed < 256; ++seed) {
    RandomStream traj(static_cast<std::uint64_t>(seed), "trajectory-0");
    Vec z = traj.normal_vector(4);
    for (int t = 200; t >= 1; --t) z = consistent_reverse_step(z, t, v1, v2, s200, vw, traj).z_next;
    mean += z;
  }
  mean /= 256.0;
  const Vec product = 0.5 * (r1.pixels + r2.pixels);
  const double err = rel(mean, product);
  return {spots && worst < 1e-10 && err <= 0.10,
          fmt("gamma spots %s, score err %.2g, two-view mean rel err %.4f", spots ? "exact" : "wrong", worst, err)};
}

Outcome pose_recovery() {
  const RunConfig rc = load_config((kConfigs / "posefree.toml").string());
  const LinearCodec codec = build_codec(rc.scene, rc.seed);
  double worst = 0.0, worst_secs = 0.0;
  std::string angles;
  for (int i = 0; i < 3; ++i) {
    const PoseScene scene = synth_pose_scene(rc.scene, rc.seed, i);
    const auto t0 = std::chrono::steady_clock::now();
    PosefreeOptions opts;
    opts.stream = "trajectory-" + std::to_string(i);
    const PosefreeResult r = run_posefree(rc.em, scene.y1, scene.phi1, scene.y2, codec, opts);
    worst_secs = std::max(worst_secs, seconds_since(t0));
    const PoseLoss loss(scene.y2, r.synth, scene.y1, scene.phi1, 1.0, 1.0, codec);
    const auto grid = oracle::pose_grid_search([&](double a) { return loss(a); }, 1.0);
    const double d = std::abs(PoseParam::angular_difference(r.phi2.angle, grid.pose.angle)) / kDeg;
    worst = std::max(worst, d);
    angles += fmt(" %.2f/%.0f", r.phi2.angle / kDeg, grid.pose.angle / kDeg);
  }
  return {worst <= 2.0 && worst_secs < 30.0,
          fmt("theta* = %.0f deg, estimate/grid argmin:%s deg, max gap %.2f deg, slowest %.1f s", rc.scene.pose_deg,
              angles.c_str(), worst, worst_secs)};
}

Outcome metric_units() {
  RandomStream rng(404, "acceptance-mnc");
  const Kernel k = random_kernel(5, rng);
  const double same = mnc(k, k);
  Kernel shifted(5);
  shifted.at(0, 3) = 1.0;
  const double shift = mnc(shifted, Kernel::delta(5));
  const double third = mnc(Kernel::delta(3), Kernel::uniform(3));
  const bool units = std::abs(same - 1) <= 1e-10 && std::abs(shift - 1) <= 1e-10 && std::abs(third - 1.0 / 3) <= 1e-10;

  const std::vector<double> levels = {-0.7, 0.0, 0.15, 0.5, 1.0, 1.6};
  int grids = 0;
  double worst = 0.0;
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
      std::vector<double> v(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = levels[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      const auto fast = simplex_project(v), brute = oracle::simplex_project_bruteforce(v);
      for (int i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(fast[static_cast<std::size_t>(i)] - brute[static_cast<std::size_t>(i)]));
      ++grids;
      int pos = 0;
      while (pos < n && ++idx[static_cast<std::size_t>(pos)] == static_cast<int>(levels.size())) idx[static_cast<std::size_t>(pos++)] = 0;
      if (pos == n) break;
    }
  }
  return {units && worst <= 1e-12,
          fmt("mnc %.12f %.12f %.12f, simplex max diff %.2g over %d grids", same, shift, third, worst, grids)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path a = kWork / "det-a", b = kWork / "det-b";
  fs::remove_all(a);
  fs::remove_all(b);
  cli::RunFlags flags;
  flags.config = (kConfigs / "deblur.toml").string();
  flags.trace = true;
  flags.out = a.string();
  flags.jobs = 1;
  const int ra = cli::cmd_deblur(flags);
  flags.out = b.string();
  flags.jobs = 4;
  const int rb = cli::cmd_deblur(flags);
  const RunConfig rc = deblur_config();
  int compared = 0;
  bool same = ra == 0 && rb == 0;
  for (int i = 0; i < rc.trials; ++i) {
    for (const char* f : {"x0.ldemf32", "trace.csv"}) {
      const fs::path rel_path = fs::path("trial-" + std::to_string(i)) / f;
      const std::string x = slurp(a / rel_path), y = slurp(b / rel_path);
      same = same && !x.empty() && x == y;
      ++compared;
    }
  }
  return {same, fmt("%d file pairs across %d trials (jobs 1 vs 4): %s", compared, rc.trials,
                    same ? "byte-identical" : "differ")};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

Outcome bench_trend() {
  const fs::path out = kWork / "bench";
  fs::remove_all(out);
  cli::RunFlags flags;
  flags.config = (kConfigs / "bench.toml").string();
  flags.out = out.string();
  if (cli::cmd_bench(flags) != 0) return {false, "cmd_bench failed"};
  std::ifstream f(out / "bench.csv");
  std::string line;
  std::getline(f, line);
  const bool header = line == "method,skipped_steps,running_time_ms,psnr,kernel_mse";
  std::vector<int> skipped;
  std::vector<double> ms;
  std::string rows;
  while (std::getline(f, line)) {
    const auto cells = split(line);
    if (cells.size() != 5) return {false, "malformed row: " + line};
    skipped.push_back(std::stoi(cells[1]));
    ms.push_back(std::stod(cells[2]));
    rows += fmt(" %s M=%s %.0fms", cells[0].c_str(), cells[1].c_str(), ms.back());
  }
  bool trend = skipped.size() == 3 && skipped == std::vector<int>{0, 437, 469};
  for (std::size_t i = 1; trend && i < ms.size(); ++i) trend = ms[i] < ms[i - 1];
  return {header && trend, fmt("header %s,%s", header ? "ok" : "wrong", rows.c_str())};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  fs::create_directories(kWork);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"hqs matches dense solve", hqs_equivalence},
      {"linear-gaussian posterior mean", posterior_mean},
      {"reduction bit-exactness", reductions},
      {"skip count", skip_count},
      {"annealing values", anneal_values},
      {"blind deblurring improvement", blind_deblur},
      {"view-consistent score", view_consistent},
      {"pose recovery", pose_recovery},
      {"metric units and simplex", metric_units},
      {"cli determinism", determinism},
      {"bench schema and trend", bench_trend},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
