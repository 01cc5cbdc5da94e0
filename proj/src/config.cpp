#include "latentdem/config.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace latentdem {

namespace {

class Section {
 public:
  Section(const toml::table* tbl, std::string name) : tbl_(tbl), name_(std::move(name)) {}

  void check(const std::set<std::string>& allowed) const {
    if (tbl_ == nullptr) return;
    for (const auto& [key, _] : *tbl_) {
      if (!allowed.contains(std::string(key.str())))
        throw Error("config: unknown key '" + qualified(std::string(key.str())) + "'");
    }
  }

  [[nodiscard]] bool has(const std::string& key) const { return tbl_ != nullptr && tbl_->contains(key); }

  template <class T>
  void get(const std::string& key, T& out) const {
    if (!has(key)) return;
    const toml::node& n = *tbl_->get(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n.value_exact<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = n.value_exact<std::string>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (auto v = n.value<double>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = n.value_exact<std::int64_t>()) {
        if constexpr (std::is_unsigned_v<T>) {
          if (*v < 0) throw Error("config: '" + qualified(key) + "' must be non-negative");
        }
        out = static_cast<T>(*v);
        return;
      }
    }
    throw Error("config: '" + qualified(key) + "' has the wrong type");
  }

  void get_doubles(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    out = doubles(*tbl_->get(key), key);
  }

  void get_ints(const std::string& key, std::vector<int>& out) const {
    if (!has(key)) return;
    const auto* arr = tbl_->get(key)->as_array();
    if (arr == nullptr) throw Error("config: '" + qualified(key) + "' must be an array");
    out.clear();
    for (const auto& e : *arr) {
      auto v = e.value_exact<std::int64_t>();
      if (!v) throw Error("config: '" + qualified(key) + "' must hold integers");
      out.push_back(static_cast<int>(*v));
    }
  }

  [[nodiscard]] const toml::node* node(const std::string& key) const { return has(key) ? tbl_->get(key) : nullptr; }

  [[nodiscard]] std::vector<double> doubles(const toml::node& n, const std::string& key) const {
    const auto* arr = n.as_array();
    if (arr == nullptr) throw Error("config: '" + qualified(key) + "' must be an array");
    std::vector<double> v;
    for (const auto& e : *arr) {
      auto d = e.value<double>();
      if (!d) throw Error("config: '" + qualified(key) + "' must hold numbers");
      v.push_back(*d);
    }
    return v;
  }

  [[nodiscard]] std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

 private:
  const toml::table* tbl_;
  std::string name_;
};

Section section(const toml::table& root, const std::string& name) {
  if (!root.contains(name)) return {nullptr, name};
  const auto* t = root.get(name)->as_table();
  if (t == nullptr) throw Error("config: '" + name + "' must be a table");
  return {t, name};
}

std::string resolve(const std::string& p, const std::string& base) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base) / path;
  return path.lexically_normal().string();
}

}  // namespace

std::string task_name(Task t) { return t == Task::deblur ? "deblur" : "posefree"; }

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(msg.str());
  }

  RunConfig c;
  const Section top(&root, "");
  top.check({"schema", "task", "seed", "trials", "jobs", "schedule", "anneal", "skip", "hqs", "estep", "kernel", "scene",
             "codec", "prior", "posefree", "io", "bench"});
  if (!top.has("schema")) throw Error("config: missing 'schema'");
  top.get("schema", c.schema);
  if (c.schema != kConfigSchema) throw Error("config: unsupported schema " + std::to_string(c.schema));
  if (!top.has("seed")) throw Error("config: missing 'seed'");
  top.get("seed", c.seed);
  std::string task = "deblur";
  top.get("task", task);
  if (task == "deblur") {
    c.task = Task::deblur;
  } else if (task == "posefree") {
    c.task = Task::posefree;
  } else {
    throw Error("config: task must be 'deblur' or 'posefree', got '" + task + "'");
  }
  top.get("trials", c.trials);
  top.get("jobs", c.jobs);

  EMConfig& em = c.em;
  const Section sched = section(root, "schedule");
  sched.check({"steps", "beta_min", "beta_max"});
  sched.get("steps", em.steps);
  sched.get("beta_min", em.beta_min);
  sched.get("beta_max", em.beta_max);

  const Section anneal = section(root, "anneal");
  anneal.check({"t_start", "zeta_start", "t_end", "zeta_end"});
  anneal.get("t_start", em.anneal.t_start);
  anneal.get("zeta_start", em.anneal.zeta_start);
  anneal.get("t_end", em.anneal.t_end);
  anneal.get("zeta_end", em.anneal.zeta_end);

  const Section skip = section(root, "skip");
  skip.check({"s_t", "k"});
  skip.get("s_t", em.skip.s_t);
  skip.get("k", em.skip.k);

  const Section hqs = section(root, "hqs");
  hqs.check({"lambda", "delta", "iterations", "denoiser"});
  hqs.get("lambda", em.hqs.lambda);
  hqs.get("delta", em.hqs.delta);
  hqs.get("iterations", em.hqs.iterations);
  hqs.get("denoiser", em.denoiser);

  const Section estep = section(root, "estep");
  estep.check({"sigma", "gluing", "dc_scale"});
  estep.get("sigma", em.sigma);
  estep.get("gluing", em.gluing);
  estep.get("dc_scale", em.dc_scale);
  em.hqs.sigma = em.sigma;

  const Section kernel = section(root, "kernel");
  kernel.check({"size", "init"});
  kernel.get("size", em.kernel_size);
  std::string init = "uniform";
  kernel.get("init", init);
  if (init == "uniform") {
    em.kernel_init = KernelInit::uniform;
  } else if (init == "random") {
    em.kernel_init = KernelInit::random;
  } else {
    throw Error("config: kernel.init must be 'uniform' or 'random'");
  }

  SceneSpec& sc = c.scene;
  sc.noise_sigma = em.sigma;
  const Section scene = section(root, "scene");
  scene.check({"size", "noise_sigma", "kernel", "pose_deg", "count"});
  scene.get("size", sc.size);
  scene.get("noise_sigma", sc.noise_sigma);
  scene.get("kernel", sc.kernel);
  scene.get("pose_deg", sc.pose_deg);
  scene.get("count", sc.count);

  const Section codec = section(root, "codec");
  codec.check({"type", "latent_dim", "rank", "scale", "offset", "file"});
  codec.get("type", sc.codec.type);
  codec.get("latent_dim", sc.codec.latent_dim);
  sc.codec.rank = sc.codec.latent_dim;
  codec.get("rank", sc.codec.rank);
  codec.get("scale", sc.codec.scale);
  codec.get("offset", sc.codec.offset);
  codec.get("file", sc.codec.file);
  sc.codec.file = resolve(sc.codec.file, base_dir);

  const Section prior = section(root, "prior");
  prior.check({"components", "mean_scale", "eig_min", "eig_max", "weights", "means", "covariances"});
  prior.get("components", sc.prior.components);
  prior.get("mean_scale", sc.prior.mean_scale);
  prior.get("eig_min", sc.prior.eig_min);
  prior.get("eig_max", sc.prior.eig_max);
  prior.get_doubles("weights", sc.prior.weights);
  if (const toml::node* n = prior.node("means")) {
    const auto* arr = n->as_array();
    if (arr == nullptr) throw Error("config: 'prior.means' must be an array of arrays");
    for (const auto& e : *arr) sc.prior.means.push_back(prior.doubles(e, "means"));
  }
  if (const toml::node* n = prior.node("covariances")) {
    const auto* arr = n->as_array();
    if (arr == nullptr) throw Error("config: 'prior.covariances' must be an array of matrices");
    for (const auto& m : *arr) {
      const auto* rows = m.as_array();
      if (rows == nullptr) throw Error("config: 'prior.covariances' must be an array of matrices");
      std::vector<std::vector<double>> mat;
      for (const auto& r : *rows) mat.push_back(prior.doubles(r, "covariances"));
      sc.prior.covariances.push_back(std::move(mat));
    }
  }

  const Section pf = section(root, "posefree");
  pf.check({"tau", "nu_max", "ratio_start", "pose_lr", "pose_steps", "pose_max_step", "pose_every", "pose_mstep"});
  pf.get("tau", em.tau);
  if (const toml::node* n = pf.node("nu_max"); n != nullptr && n->is_string()) {
    if (n->value_or(std::string()) != "inf") throw Error("config: 'posefree.nu_max' must be a number or \"inf\"");
    em.nu_max = std::numeric_limits<double>::infinity();
  } else {
    pf.get("nu_max", em.nu_max);
  }
  pf.get("ratio_start", em.ratio_start);
  pf.get("pose_lr", em.pose.lr);
  pf.get("pose_steps", em.pose.steps);
  pf.get("pose_max_step", em.pose.max_step);
  pf.get("pose_every", em.pose_every);
  pf.get("pose_mstep", c.pose_mstep);

  const Section io = section(root, "io");
  io.check({"scene_dir", "out", "trace"});
  io.get("scene_dir", c.scene_dir);
  io.get("out", c.out);
  io.get("trace", c.trace);
  c.scene_dir = resolve(c.scene_dir, base_dir);
  c.out = resolve(c.out, base_dir);

  const Section bench = section(root, "bench");
  bench.check({"k_values", "seeds", "repeats"});
  bench.get_ints("k_values", c.bench_k);
  bench.get("seeds", c.bench_seeds);
  bench.get("repeats", c.bench_repeats);

  em.seed = c.seed;
  if (c.trials < 1) throw Error("config: trials must be >= 1");
  if (c.jobs < 1) throw Error("config: jobs must be >= 1");
  if (sc.count < 1) throw Error("config: scene.count must be >= 1");
  if (c.bench_seeds < 1) throw Error("config: bench.seeds must be >= 1");
  if (c.bench_repeats < 1) throw Error("config: bench.repeats must be >= 1");
  if (sc.codec.type == "file" && !fs::is_regular_file(sc.codec.file))
    throw Error("config: codec file not found: " + sc.codec.file);
  if (!c.scene_dir.empty() && !fs::is_directory(c.scene_dir))
    throw Error("config: scene_dir not found: " + c.scene_dir);
  em.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const fs::path p(path);
  return parse_config(ss.str(), p.has_parent_path() ? p.parent_path().string() : ".");
}

}  // namespace latentdem
