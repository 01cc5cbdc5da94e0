#pragma once

#include "latentdem/codec.hpp"
#include "latentdem/forward.hpp"
#include "latentdem/sched.hpp"
#include "latentdem/types.hpp"

#include <optional>
#include <vector>

namespace latentdem {

/// Score of the diffused latent prior, s(z_t, t) = grad log p_t(z_t).
/// Learned models implement score() only; analytic priors also expose the
/// Jacobian so guidance can differentiate through the Tweedie estimate.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  [[nodiscard]] virtual Eigen::Index dim() const = 0;
  [[nodiscard]] virtual Vec score(const Vec& z, const NoiseSchedule& s, int t) const = 0;
  /// d score / d z, or nullopt when unavailable (callers then use the
  /// stop-gradient approximation).
  [[nodiscard]] virtual std::optional<Mat> score_jacobian(const Vec&, const NoiseSchedule&, int) const {
    return std::nullopt;
  }
};

/// N(mean, cov) over latents. The covariance is kept as an eigendecomposition
/// so the diffused marginal N(sqrt(ab) mean, ab cov + (1 - ab) I) can be
/// inverted at any t in O(N^2).
class GaussianPrior final : public ScoreModel {
 public:
  GaussianPrior(Vec mean, const Mat& cov);
  static GaussianPrior isotropic(Vec mean, double variance);

  [[nodiscard]] Eigen::Index dim() const override { return mean_.size(); }
  [[nodiscard]] Vec score(const Vec& z, const NoiseSchedule& s, int t) const override;
  [[nodiscard]] std::optional<Mat> score_jacobian(const Vec& z, const NoiseSchedule& s, int t) const override;

  /// Same quantities parameterized directly by alpha_bar.
  [[nodiscard]] Vec score_at(const Vec& z, double alpha_bar) const;
  [[nodiscard]] Mat score_jacobian_at(double alpha_bar) const;
  [[nodiscard]] double log_density_at(const Vec& z, double alpha_bar) const;

  [[nodiscard]] const Vec& mean() const { return mean_; }
  [[nodiscard]] Mat covariance() const;

 private:
  GaussianPrior() = default;

  Vec mean_;
  // Empty basis means cov = variance_ * I.
  Mat basis_;
  Vec eigenvalues_;
  double isotropic_variance_ = 0.0;
};

/// Sum_j w_j N(mu_j, Sigma_j). Responsibilities are computed in log space.
class GaussianMixturePrior final : public ScoreModel {
 public:
  struct Component {
    double weight;
    GaussianPrior prior;
  };

  explicit GaussianMixturePrior(std::vector<Component> components);

  [[nodiscard]] Eigen::Index dim() const override { return components_.front().prior.dim(); }
  [[nodiscard]] Vec score(const Vec& z, const NoiseSchedule& s, int t) const override;
  [[nodiscard]] std::optional<Mat> score_jacobian(const Vec& z, const NoiseSchedule& s, int t) const override;

  [[nodiscard]] Vec score_at(const Vec& z, double alpha_bar) const;
  [[nodiscard]] Mat score_jacobian_at(const Vec& z, double alpha_bar) const;
  [[nodiscard]] double log_density_at(const Vec& z, double alpha_bar) const;
  [[nodiscard]] Vec responsibilities(const Vec& z, double alpha_bar) const;

  [[nodiscard]] const std::vector<Component>& components() const { return components_; }

 private:
  std::vector<Component> components_;
};

/// Toy conditional-view model: N(encode(view_transform(ref, pose)), tau^2 I),
/// i.e. the reference image moved to the target pose plus isotropic
/// uncertainty.
class ConditionalViewPrior final : public ScoreModel {
 public:
  ConditionalViewPrior(const LinearCodec& codec, const Image& ref, const PoseParam& pose, double tau);

  [[nodiscard]] Eigen::Index dim() const override { return gaussian_.dim(); }
  [[nodiscard]] Vec score(const Vec& z, const NoiseSchedule& s, int t) const override {
    return gaussian_.score(z, s, t);
  }
  [[nodiscard]] std::optional<Mat> score_jacobian(const Vec& z, const NoiseSchedule& s, int t) const override {
    return gaussian_.score_jacobian(z, s, t);
  }
  [[nodiscard]] const GaussianPrior& gaussian() const { return gaussian_; }

 private:
  GaussianPrior gaussian_;
};

Vec gaussian_score(const GaussianPrior& p, const NoiseSchedule& s, const Vec& z_t, int t);
Vec gmm_score(const GaussianMixturePrior& p, const NoiseSchedule& s, const Vec& z_t, int t);
Vec conditional_view_score(const LinearCodec& codec, const Image& ref, const PoseParam& pose, double tau,
                           const NoiseSchedule& s, const Vec& z_t, int t);

}  // namespace latentdem
