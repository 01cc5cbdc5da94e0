#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latentdem {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a Fourier-domain division has a zero denominator.
class SingularDivision : public Error {
 public:
  using Error::Error;
};

/// Row-major real pixel grid. Pixels are stored as a flat vector so the codec
/// can treat an image as a point in R^(rows*cols) without copies.
struct Image {
  int rows = 0;
  int cols = 0;
  Vec pixels;

  Image() = default;
  Image(int r, int c) : rows(r), cols(c), pixels(Vec::Zero(static_cast<Eigen::Index>(r) * c)) {}
  Image(int r, int c, Vec p) : rows(r), cols(c), pixels(std::move(p)) {
    if (pixels.size() != static_cast<Eigen::Index>(r) * c) {
      throw Error("image: pixel count does not match " + std::to_string(r) + "x" + std::to_string(c));
    }
  }

  static Image constant(int r, int c, double value) {
    return Image(r, c, Vec::Constant(static_cast<Eigen::Index>(r) * c, value));
  }

  [[nodiscard]] Eigen::Index size() const { return pixels.size(); }
  [[nodiscard]] double& at(int r, int c) { return pixels[static_cast<Eigen::Index>(r) * cols + c]; }
  [[nodiscard]] double at(int r, int c) const { return pixels[static_cast<Eigen::Index>(r) * cols + c]; }
  [[nodiscard]] bool same_shape(const Image& o) const { return rows == o.rows && cols == o.cols; }
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(std::string(what) + ": image shapes differ (" + std::to_string(a.rows) + "x" +
                std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
  }
}

}  // namespace latentdem
