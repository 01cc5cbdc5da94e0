#include "latentdem/scene.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace latentdem {

namespace {

GaussianMixturePrior explicit_mixture(const PriorSpec& p, Eigen::Index n) {
  const std::size_t m = p.means.size();
  if (p.weights.size() != m || p.covariances.size() != m) throw Error("prior: weights, means, covariances differ in count");
  std::vector<GaussianMixturePrior::Component> comps;
  for (std::size_t c = 0; c < m; ++c) {
    if (static_cast<Eigen::Index>(p.means[c].size()) != n) throw Error("prior: mean dimension does not match latent_dim");
    Vec mu = Eigen::Map<const Vec>(p.means[c].data(), n);
    Mat cov(n, n);
    if (static_cast<Eigen::Index>(p.covariances[c].size()) != n) throw Error("prior: covariance has wrong row count");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = p.covariances[c][static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != n) throw Error("prior: covariance row has wrong length");
      for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = row[static_cast<std::size_t>(j)];
    }
    comps.push_back({p.weights[c], GaussianPrior(std::move(mu), cov)});
  }
  return GaussianMixturePrior(std::move(comps));
}

GaussianMixturePrior random_mixture(const PriorSpec& p, Eigen::Index n, RandomStream& rng) {
  if (p.components < 1) throw Error("prior: components must be >= 1");
  if (!(p.eig_min > 0.0 && p.eig_max >= p.eig_min)) throw Error("prior: need 0 < eig_min <= eig_max");
  std::vector<GaussianMixturePrior::Component> comps;
  for (int c = 0; c < p.components; ++c) {
    Vec mu = p.mean_scale * rng.normal_vector(n);
    Mat g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) g.col(j) = rng.normal_vector(n);
    const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
    Vec ev(n);
    for (Eigen::Index i = 0; i < n; ++i) ev[i] = p.eig_min + (p.eig_max - p.eig_min) * rng.uniform();
    const Mat cov = q * ev.asDiagonal() * q.transpose();
    comps.push_back({1.0 / p.components, GaussianPrior(std::move(mu), 0.5 * (cov + cov.transpose()))});
  }
  return GaussianMixturePrior(std::move(comps));
}

}  // namespace

LinearCodec build_codec(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.size < 8) throw Error("scene: size must be >= 8");
  const CodecSpec& cs = spec.codec;
  RandomStream codec_rng(seed, "codec");
  if (cs.type == "identity") return LinearCodec::identity(spec.size, spec.size);
  if (cs.type == "random")
    return LinearCodec::random(spec.size, spec.size, cs.latent_dim, cs.rank, cs.scale, cs.offset, codec_rng);
  if (cs.type == "file") return LinearCodec::from_file(cs.file, spec.size, spec.size, cs.offset);
  throw Error("codec: unknown type '" + cs.type + "' (expected random, identity or file)");
}

LatentModel build_model(const SceneSpec& spec, std::uint64_t seed) {
  LinearCodec codec = build_codec(spec, seed);
  RandomStream prior_rng(seed, "prior");
  const Eigen::Index n = codec.latent_dim();
  GaussianMixturePrior prior =
      spec.prior.means.empty() ? random_mixture(spec.prior, n, prior_rng) : explicit_mixture(spec.prior, n);
  return {std::move(codec), std::move(prior)};
}

Kernel sample_kernel(const std::string& spec, RandomStream& rng) {
  constexpr std::string_view prefix = "random-aniso,";
  if (spec.rfind(prefix, 0) != 0) return Kernel::from_spec(spec);
  int k = 0;
  std::istringstream ss(spec.substr(prefix.size()));
  if (!(ss >> k) || !ss.eof() || k < 1 || k % 2 == 0) throw Error("kernel spec '" + spec + "': bad size");
  const double wu = 0.5 + rng.uniform();
  const double wv = 0.3 + 0.5 * rng.uniform();
  const double angle = std::numbers::pi * rng.uniform();
  return Kernel::gaussian(k, wu, wv, angle);
}

DeblurScene synth_deblur_scene(const SceneSpec& spec, const LatentModel& model, std::uint64_t seed, int index) {
  RandomStream rng(seed, "scene-" + std::to_string(index));
  const auto& comps = model.prior.components();
  double u = rng.uniform(), acc = 0.0;
  std::size_t pick = comps.size() - 1;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    acc += comps[c].weight;
    if (u < acc) {
      pick = c;
      break;
    }
  }
  const GaussianPrior& g = comps[pick].prior;
  const Eigen::LLT<Mat> llt(g.covariance());
  DeblurScene s;
  s.z = g.mean() + llt.matrixL() * rng.normal_vector(g.dim());
  s.x = model.codec.decode(s.z);
  s.kernel = sample_kernel(spec.kernel, rng);
  RandomStream noise(seed, "noise-" + std::to_string(index));
  s.y = add_noise(convolve(s.x, s.kernel), spec.noise_sigma, noise);
  return s;
}

PoseScene synth_pose_scene(const SceneSpec& spec, std::uint64_t seed, int index) {
  RandomStream rng(seed, "scene-" + std::to_string(index));
  const int n = spec.size;
  Image x(n, n);
  const double c = (n - 1) / 2.0;
  for (int b = 0; b < 4; ++b) {
    const double r = 0.25 * n * rng.uniform();
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double cr = c + r * std::cos(phi), cc = c + r * std::sin(phi);
    const double w = n * (0.06 + 0.06 * rng.uniform());
    const double amp = 0.3 + 0.7 * rng.uniform();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double d2 = (i - cr) * (i - cr) + (j - cc) * (j - cc);
        x.at(i, j) += amp * std::exp(-d2 / (2.0 * w * w));
      }
    }
  }
  PoseScene s;
  s.theta = spec.pose_deg * std::numbers::pi / 180.0;
  s.y1 = x;
  s.y2 = view_transform(x, PoseParam(s.theta));
  return s;
}

}  // namespace latentdem
