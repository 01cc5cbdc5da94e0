#pragma once

// Independent reference implementations. None of these share numerical code
// with the modules they check: no FFTs, no sort-based projection, no
// gradient descent.

#include "latentdem/forward.hpp"
#include "latentdem/mstep.hpp"
#include "latentdem/prior.hpp"

#include <functional>
#include <vector>

namespace latentdem::oracle {

struct GaussianPosterior {
  Vec mean;
  Mat covariance;
};

/// Closed-form posterior of x ~ N(mu, Sigma), y = A x + N(0, sigma^2 I).
GaussianPosterior analytic_gaussian_posterior(const Vec& prior_mean, const Mat& prior_cov, const Mat& a,
                                              const Vec& y, double sigma);

/// Dense circulant matrix C_x with (C_x z) = x (*) z (circular).
Mat circulant_matrix(const Image& x);

/// Full-grid HQS data update by solving (C^T C + delta sigma^2 I) Z = C^T y + delta sigma^2 phi.
Image dense_hqs_solve_full(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg);
Kernel dense_hqs_solve(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg);

/// Spatial-domain circular convolution, O(n^2 k^2).
Image spatial_convolve(const Image& x, const Kernel& k);

struct GridSearchResult {
  PoseParam pose;
  double loss = 0.0;
  /// True when every evaluated loss is equal to within 1e-12 relative.
  bool flat = false;
};

/// Evaluates loss on angles 0, res, 2 res, ... < 360 degrees.
GridSearchResult pose_grid_search(const std::function<double(double)>& loss, double resolution_deg);

/// Enumerates every support subset; valid for at most 16 entries.
std::vector<double> simplex_project_bruteforce(const std::vector<double>& v);

}  // namespace latentdem::oracle
