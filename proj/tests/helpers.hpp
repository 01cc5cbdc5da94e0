#pragma once

#include "latentdem/forward.hpp"
#include "latentdem/rng.hpp"
#include "latentdem/types.hpp"

#include <functional>

namespace testing {

using latentdem::Image;
using latentdem::Kernel;
using latentdem::Mat;
using latentdem::RandomStream;
using latentdem::Vec;

inline Image random_image(int rows, int cols, RandomStream& rng) {
  Image x(rows, cols);
  for (auto& v : x.pixels) v = rng.uniform();
  return x;
}

inline Kernel random_kernel(int k, RandomStream& rng) {
  Kernel out(k);
  double s = 0.0;
  for (auto& v : out.values) s += (v = rng.uniform());
  for (auto& v : out.values) v /= s;
  return out;
}

inline Mat random_spd(Eigen::Index n, RandomStream& rng, double floor = 0.5) {
  Mat g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = rng.normal_vector(n);
  return g * g.transpose() / static_cast<double>(n) + floor * Mat::Identity(n, n);
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

/// Smooth, asymmetric test image built from Gaussian bumps.
inline Image smooth_image(int n, RandomStream& rng, int bumps = 3) {
  Image x(n, n);
  for (int b = 0; b < bumps; ++b) {
    const double cr = n * (0.3 + 0.4 * rng.uniform()), cc = n * (0.3 + 0.4 * rng.uniform());
    const double w = n * (0.08 + 0.05 * rng.uniform());
    const double amp = 0.5 + 0.5 * rng.uniform();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        x.at(i, j) += amp * std::exp(-((i - cr) * (i - cr) + (j - cc) * (j - cc)) / (2 * w * w));
  }
  return x;
}

}  // namespace testing

namespace testing {

/// Smooth bumps near the center of an n x n grid, peak 1. Content stays well
/// inside the inscribed disk so rotations do not wrap it.
inline latentdem::Image centered_image(int n, latentdem::RandomStream& rng, double width = 6.0) {
  latentdem::Image x(n, n);
  const double c = (n - 1) / 2.0, spread = n / 16.0;
  for (int b = 0; b < 3; ++b) {
    const double cr = c + spread * (2 * rng.uniform() - 1), cc = c + spread * (2 * rng.uniform() - 1);
    const double amp = 0.5 + 0.5 * rng.uniform();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        x.at(i, j) += amp * std::exp(-((i - cr) * (i - cr) + (j - cc) * (j - cc)) / (2 * width * width));
  }
  x.pixels /= x.pixels.maxCoeff();
  return x;
}

}  // namespace testing
