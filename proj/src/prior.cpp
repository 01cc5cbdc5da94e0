#include "latentdem/prior.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace latentdem {

// ---------------------------------------------------------------------------
// GaussianPrior

GaussianPrior::GaussianPrior(Vec mean, const Mat& cov) : mean_(std::move(mean)) {
  const Eigen::Index n = mean_.size();
  if (n == 0) throw Error("gaussian prior: empty mean");
  if (cov.rows() != n || cov.cols() != n) throw Error("gaussian prior: covariance shape mismatch");
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, cov.cwiseAbs().maxCoeff())) throw Error("gaussian prior: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (cov + cov.transpose()));
  if (eig.info() != Eigen::Success) throw Error("gaussian prior: eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() <= 0.0) throw Error("gaussian prior: covariance not positive definite");
  basis_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues();
}

GaussianPrior GaussianPrior::isotropic(Vec mean, double variance) {
  if (!(variance > 0.0)) throw Error("gaussian prior: variance must be positive");
  if (mean.size() == 0) throw Error("gaussian prior: empty mean");
  GaussianPrior p;
  p.mean_ = std::move(mean);
  p.isotropic_variance_ = variance;
  return p;
}

Mat GaussianPrior::covariance() const {
  if (basis_.size() == 0) return isotropic_variance_ * Mat::Identity(dim(), dim());
  return basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
}

Vec GaussianPrior::score_at(const Vec& z, double ab) const {
  if (z.size() != dim()) throw Error("gaussian score: dimension mismatch");
  const Vec d = z - std::sqrt(ab) * mean_;
  if (basis_.size() == 0) {
    const double m = ab * isotropic_variance_ + (1.0 - ab);
    if (!(m > 0.0)) throw Error("gaussian score: singular marginal covariance");
    return -d / m;
  }
  const Vec m = (ab * eigenvalues_).array() + (1.0 - ab);
  if (!(m.minCoeff() > 0.0)) throw Error("gaussian score: singular marginal covariance");
  return -(basis_ * ((basis_.transpose() * d).array() / m.array()).matrix());
}

Mat GaussianPrior::score_jacobian_at(double ab) const {
  if (basis_.size() == 0) {
    return -Mat::Identity(dim(), dim()) / (ab * isotropic_variance_ + (1.0 - ab));
  }
  const Vec inv = ((ab * eigenvalues_).array() + (1.0 - ab)).inverse();
  return -(basis_ * inv.asDiagonal() * basis_.transpose());
}

double GaussianPrior::log_density_at(const Vec& z, double ab) const {
  const Vec d = z - std::sqrt(ab) * mean_;
  const double n = static_cast<double>(dim());
  const double log2pi = std::log(2.0 * std::numbers::pi);
  if (basis_.size() == 0) {
    const double m = ab * isotropic_variance_ + (1.0 - ab);
    return -0.5 * d.squaredNorm() / m - 0.5 * n * std::log(m) - 0.5 * n * log2pi;
  }
  const Vec m = (ab * eigenvalues_).array() + (1.0 - ab);
  const Vec proj = basis_.transpose() * d;
  return -0.5 * (proj.array().square() / m.array()).sum() - 0.5 * m.array().log().sum() - 0.5 * n * log2pi;
}

Vec GaussianPrior::score(const Vec& z, const NoiseSchedule& s, int t) const { return score_at(z, s.alpha_bar(t)); }

std::optional<Mat> GaussianPrior::score_jacobian(const Vec&, const NoiseSchedule& s, int t) const {
  return score_jacobian_at(s.alpha_bar(t));
}

// ---------------------------------------------------------------------------
// GaussianMixturePrior

GaussianMixturePrior::GaussianMixturePrior(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error("mixture prior: needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw Error("mixture prior: weights must be positive");
    if (c.prior.dim() != components_.front().prior.dim()) throw Error("mixture prior: component dimensions differ");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("mixture prior: weights must sum to 1");
}

Vec GaussianMixturePrior::responsibilities(const Vec& z, double ab) const {
  Vec logs(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t j = 0; j < components_.size(); ++j) {
    logs[static_cast<Eigen::Index>(j)] = std::log(components_[j].weight) + components_[j].prior.log_density_at(z, ab);
  }
  const double top = logs.maxCoeff();
  if (!std::isfinite(top)) {
    throw Error("mixture prior: every component density underflowed at alpha_bar=" + std::to_string(ab));
  }
  Vec r = (logs.array() - top).exp();
  return r / r.sum();
}

Vec GaussianMixturePrior::score_at(const Vec& z, double ab) const {
  const Vec r = responsibilities(z, ab);
  Vec s = r[0] * components_[0].prior.score_at(z, ab);
  for (std::size_t j = 1; j < components_.size(); ++j) {
    s += r[static_cast<Eigen::Index>(j)] * components_[j].prior.score_at(z, ab);
  }
  return s;
}

Mat GaussianMixturePrior::score_jacobian_at(const Vec& z, double ab) const {
  // J = sum_j r_j J_j + sum_j r_j s_j (s_j - s)^T
  const Vec r = responsibilities(z, ab);
  std::vector<Vec> scores;
  scores.reserve(components_.size());
  Vec s = Vec::Zero(dim());
  for (std::size_t j = 0; j < components_.size(); ++j) {
    scores.push_back(components_[j].prior.score_at(z, ab));
    s += r[static_cast<Eigen::Index>(j)] * scores.back();
  }
  Mat jac = Mat::Zero(dim(), dim());
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const double rj = r[static_cast<Eigen::Index>(j)];
    jac += rj * components_[j].prior.score_jacobian_at(ab);
    jac += rj * scores[j] * (scores[j] - s).transpose();
  }
  return jac;
}

double GaussianMixturePrior::log_density_at(const Vec& z, double ab) const {
  Vec logs(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t j = 0; j < components_.size(); ++j) {
    logs[static_cast<Eigen::Index>(j)] = std::log(components_[j].weight) + components_[j].prior.log_density_at(z, ab);
  }
  const double top = logs.maxCoeff();
  return top + std::log((logs.array() - top).exp().sum());
}

Vec GaussianMixturePrior::score(const Vec& z, const NoiseSchedule& s, int t) const {
  return score_at(z, s.alpha_bar(t));
}

std::optional<Mat> GaussianMixturePrior::score_jacobian(const Vec& z, const NoiseSchedule& s, int t) const {
  return score_jacobian_at(z, s.alpha_bar(t));
}

// ---------------------------------------------------------------------------
// ConditionalViewPrior

ConditionalViewPrior::ConditionalViewPrior(const LinearCodec& codec, const Image& ref, const PoseParam& pose, double tau)
    : gaussian_(GaussianPrior::isotropic(codec.encode(view_transform(ref, pose)), tau * tau)) {}

Vec gaussian_score(const GaussianPrior& p, const NoiseSchedule& s, const Vec& z_t, int t) { return p.score(z_t, s, t); }

Vec gmm_score(const GaussianMixturePrior& p, const NoiseSchedule& s, const Vec& z_t, int t) {
  return p.score(z_t, s, t);
}

Vec conditional_view_score(const LinearCodec& codec, const Image& ref, const PoseParam& pose, double tau,
                           const NoiseSchedule& s, const Vec& z_t, int t) {
  return ConditionalViewPrior(codec, ref, pose, tau).score(z_t, s, t);
}

}  // namespace latentdem
