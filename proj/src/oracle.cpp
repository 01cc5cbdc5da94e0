#include "latentdem/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace latentdem::oracle {

GaussianPosterior analytic_gaussian_posterior(const Vec& prior_mean, const Mat& prior_cov, const Mat& a,
                                              const Vec& y, double sigma) {
  if (!(sigma > 0.0)) throw Error("posterior oracle: sigma must be positive");
  if (a.cols() != prior_mean.size() || a.rows() != y.size()) throw Error("posterior oracle: shape mismatch");
  const Mat prior_prec = prior_cov.inverse();
  const Mat prec = prior_prec + a.transpose() * a / (sigma * sigma);
  const Mat cov = prec.inverse();
  const Vec mean = cov * (prior_prec * prior_mean + a.transpose() * y / (sigma * sigma));
  return {mean, 0.5 * (cov + cov.transpose())};
}

Mat circulant_matrix(const Image& x) {
  const int h = x.rows, w = x.cols;
  const Eigen::Index n = static_cast<Eigen::Index>(h) * w;
  Mat c(n, n);
  for (int pr = 0; pr < h; ++pr) {
    for (int pc = 0; pc < w; ++pc) {
      for (int qr = 0; qr < h; ++qr) {
        for (int qc = 0; qc < w; ++qc) {
          c(static_cast<Eigen::Index>(pr) * w + pc, static_cast<Eigen::Index>(qr) * w + qc) =
              x.at(((pr - qr) % h + h) % h, ((pc - qc) % w + w) % w);
        }
      }
    }
  }
  return c;
}

Image dense_hqs_solve_full(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg) {
  require_same_shape(y, x0_hat, "dense_hqs_solve");
  const Mat c = circulant_matrix(x0_hat);
  const double w = cfg.delta * cfg.sigma * cfg.sigma;
  const Eigen::Index n = c.rows();
  const Mat lhs = c.transpose() * c + w * Mat::Identity(n, n);
  const Vec rhs = c.transpose() * y.pixels + w * phi_prev.embed(y.rows, y.cols).pixels;
  Eigen::FullPivLU<Mat> lu(lhs);
  if (!lu.isInvertible()) throw SingularDivision("dense_hqs_solve: normal equations are singular");
  return Image(y.rows, y.cols, lu.solve(rhs));
}

Kernel dense_hqs_solve(const Image& y, const Image& x0_hat, const Kernel& phi_prev, const HQSConfig& cfg) {
  return Kernel::crop(dense_hqs_solve_full(y, x0_hat, phi_prev, cfg), phi_prev.size);
}

Image spatial_convolve(const Image& x, const Kernel& k) {
  Image out(x.rows, x.cols);
  const int r = k.radius();
  for (int pr = 0; pr < x.rows; ++pr) {
    for (int pc = 0; pc < x.cols; ++pc) {
      double s = 0.0;
      for (int i = 0; i < k.size; ++i) {
        for (int j = 0; j < k.size; ++j) {
          const int qr = ((pr - (i - r)) % x.rows + x.rows) % x.rows;
          const int qc = ((pc - (j - r)) % x.cols + x.cols) % x.cols;
          s += k.at(i, j) * x.at(qr, qc);
        }
      }
      out.at(pr, pc) = s;
    }
  }
  return out;
}

GridSearchResult pose_grid_search(const std::function<double(double)>& loss, double resolution_deg) {
  if (!(resolution_deg > 0.0)) throw Error("pose_grid_search: resolution must be positive");
  GridSearchResult best;
  best.loss = std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0;; ++i) {
    const double deg = i * resolution_deg;
    if (deg >= 360.0) break;
    const double rad = deg * std::numbers::pi / 180.0;
    const double v = loss(rad);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (v < best.loss) {
      best.loss = v;
      best.pose = PoseParam(rad);
    }
  }
  best.flat = (hi - lo) <= 1e-12 * std::max(1.0, std::abs(hi));
  return best;
}

std::vector<double> simplex_project_bruteforce(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0 || n > 16) throw Error("simplex brute force: supports 1..16 entries");
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    // On support S the projection onto {sum = 1, zero off S} shifts every
    // entry of S by the same amount.
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        sum += v[i];
        ++count;
      }
    }
    const double shift = (1.0 - sum) / count;
    std::vector<double> cand(n, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        cand[i] = v[i] + shift;
        if (cand[i] < 0.0) feasible = false;
      }
    }
    if (!feasible) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += (cand[i] - v[i]) * (cand[i] - v[i]);
    if (dist < best_dist) {
      best_dist = dist;
      best = cand;
    }
  }
  return best;
}

}  // namespace latentdem::oracle
