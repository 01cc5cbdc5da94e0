#pragma once

#include "latentdem/codec.hpp"
#include "latentdem/forward.hpp"
#include "latentdem/prior.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace latentdem {

struct CodecSpec {
  std::string type = "random";  // random | identity | file
  int latent_dim = 64;
  int rank = 64;
  /// Std of the decoder entries.
  double scale = 0.01875;
  double offset = 0.5;
  std::string file;
};

/// Either an explicit mixture (weights/means/covariances) or a random one.
struct PriorSpec {
  int components = 3;
  double mean_scale = 1.0;
  double eig_min = 0.1;
  double eig_max = 0.5;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<std::vector<double>>> covariances;
};

struct SceneSpec {
  int size = 32;
  double noise_sigma = 0.01;
  /// Kernel::from_spec string, or "random-aniso,k" for a random anisotropic Gaussian.
  std::string kernel = "random-aniso,5";
  double pose_deg = 20.0;
  int count = 1;
  CodecSpec codec;
  PriorSpec prior;
};

struct LatentModel {
  LinearCodec codec;
  GaussianMixturePrior prior;
};

/// Codec from stream "codec".
LinearCodec build_codec(const SceneSpec& spec, std::uint64_t seed);

/// build_codec plus a mixture from stream "prior".
LatentModel build_model(const SceneSpec& spec, std::uint64_t seed);

Kernel sample_kernel(const std::string& spec, RandomStream& rng);

struct DeblurScene {
  Vec z;
  Image x;
  Kernel kernel;
  Image y;
};

/// Latent drawn from the mixture, blurred with the scene kernel, plus noise
/// (streams "scene-<i>" and "noise-<i>").
DeblurScene synth_deblur_scene(const SceneSpec& spec, const LatentModel& model, std::uint64_t seed, int index);

struct PoseScene {
  Image y1;
  Image y2;
  PoseParam phi1;
  /// Rotation taking y1 to y2 (radians).
  double theta = 0.0;
};

/// Smooth blob image y1 and its rotation y2 = view_transform(y1, theta).
PoseScene synth_pose_scene(const SceneSpec& spec, std::uint64_t seed, int index);

}  // namespace latentdem
