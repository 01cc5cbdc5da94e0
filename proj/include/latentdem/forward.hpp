#pragma once

#include "latentdem/rng.hpp"
#include "latentdem/types.hpp"

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace latentdem {

// ---------------------------------------------------------------------------
// FFT

struct ComplexGrid {
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> data;

  ComplexGrid() = default;
  ComplexGrid(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}
  std::complex<double>& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const std::complex<double>& at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// Unnormalized forward DFT.
ComplexGrid fft2(const Image& x);
ComplexGrid fft2(const ComplexGrid& x);
/// Inverse DFT including the 1/(rows*cols) factor.
ComplexGrid ifft2(const ComplexGrid& x);
/// Real part of ifft2.
Image ifft2_real(const ComplexGrid& x);

// ---------------------------------------------------------------------------
// Kernel

/// Odd-sized k x k grid. Entry (k/2, k/2) is the kernel center; under the
/// circular embedding it sits at the image origin (0, 0), so kernel entry
/// (i, j) lands at pixel ((i - k/2) mod H, (j - k/2) mod W).
///
/// Valid kernels are non-negative and sum to one. Intermediate HQS iterates
/// use the same type without those guarantees; see is_valid().
struct Kernel {
  int size = 0;
  std::vector<double> values;

  Kernel() = default;
  explicit Kernel(int k);
  Kernel(int k, std::vector<double> v);

  static Kernel delta(int k);
  static Kernel uniform(int k);
  /// Isotropic Gaussian with standard deviation `width` pixels, unit sum.
  static Kernel gaussian(int k, double width);
  /// Anisotropic Gaussian (widths along/across `angle`), unit sum.
  static Kernel gaussian(int k, double width_u, double width_v, double angle);
  /// Linear motion blur of `length` pixels along `angle`, unit sum.
  static Kernel motion(int k, double length, double angle);
  /// Parses "gaussian,k,width", "aniso,k,wu,wv,angle" or "motion,k,length,angle".
  static Kernel from_spec(const std::string& spec);

  [[nodiscard]] int radius() const { return size / 2; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * size + j]; }
  [[nodiscard]] double at(int i, int j) const { return values[static_cast<std::size_t>(i) * size + j]; }
  [[nodiscard]] double sum() const;
  [[nodiscard]] bool is_valid(double tol = 1e-9) const;

  /// Circular embedding into an H x W grid (see above).
  [[nodiscard]] Image embed(int rows, int cols) const;
  /// Inverse of embed(): reads the k x k window around the origin.
  static Kernel crop(const Image& grid, int k);
};

// ---------------------------------------------------------------------------
// Pose

/// Toy camera pose. Only `angle` (in-plane rotation, radians) is used by the
/// operators; the spherical fields are carried for completeness.
struct PoseParam {
  double angle = 0.0;
  double theta_polar = 0.0;
  double azimuth = 0.0;
  double radius = 0.0;

  PoseParam() = default;
  explicit PoseParam(double a) : angle(normalize_angle(a)) {}

  /// Maps any angle into [0, 2*pi).
  static double normalize_angle(double a);
  /// Signed distance in (-pi, pi].
  static double angular_difference(double a, double b);
};

// ---------------------------------------------------------------------------
// Image operations

/// Circular 2-D convolution via FFT.
Image convolve(const Image& x, const Kernel& k);
/// Circular convolution of two same-size grids via FFT.
Image convolve_grid(const Image& a, const Image& b);
/// x + sigma * eps with eps drawn from `rng`; sigma = 0 returns x unchanged.
Image add_noise(const Image& x, double sigma, RandomStream& rng);
/// Bilinear rotation about the image center with periodic padding.
Image view_transform(const Image& x, const PoseParam& p);
/// Exact adjoint of view_transform for the same pose.
Image view_transform_adjoint(const Image& y, const PoseParam& p);

// ---------------------------------------------------------------------------
// Forward operators

enum class OperatorKind { convolution, view, identity, zero };

/// A_phi with its adjoint and observation noise level.
class ForwardOperator {
 public:
  virtual ~ForwardOperator() = default;
  [[nodiscard]] virtual OperatorKind kind() const = 0;
  [[nodiscard]] virtual Image apply(const Image& x) const = 0;
  [[nodiscard]] virtual Image adjoint(const Image& y) const = 0;
  [[nodiscard]] virtual bool supports_adjoint() const { return true; }
  [[nodiscard]] double sigma() const { return sigma_; }
  void set_sigma(double s) { sigma_ = s; }

 protected:
  explicit ForwardOperator(double sigma) : sigma_(sigma) {}

 private:
  double sigma_;
};

class ConvolutionOperator final : public ForwardOperator {
 public:
  ConvolutionOperator(Kernel k, int rows, int cols, double sigma = 0.0);
  [[nodiscard]] OperatorKind kind() const override { return OperatorKind::convolution; }
  [[nodiscard]] Image apply(const Image& x) const override;
  [[nodiscard]] Image adjoint(const Image& y) const override;
  [[nodiscard]] const Kernel& kernel() const { return kernel_; }

 private:
  Kernel kernel_;
  int rows_, cols_;
  ComplexGrid spectrum_;
};

class ViewOperator final : public ForwardOperator {
 public:
  explicit ViewOperator(PoseParam p, double sigma = 0.0) : ForwardOperator(sigma), pose_(p) {}
  [[nodiscard]] OperatorKind kind() const override { return OperatorKind::view; }
  [[nodiscard]] Image apply(const Image& x) const override { return view_transform(x, pose_); }
  [[nodiscard]] Image adjoint(const Image& y) const override { return view_transform_adjoint(y, pose_); }
  [[nodiscard]] const PoseParam& pose() const { return pose_; }

 private:
  PoseParam pose_;
};

class IdentityOperator final : public ForwardOperator {
 public:
  explicit IdentityOperator(double sigma = 0.0) : ForwardOperator(sigma) {}
  [[nodiscard]] OperatorKind kind() const override { return OperatorKind::identity; }
  [[nodiscard]] Image apply(const Image& x) const override { return x; }
  [[nodiscard]] Image adjoint(const Image& y) const override { return y; }
};

class ZeroOperator final : public ForwardOperator {
 public:
  explicit ZeroOperator(double sigma = 0.0) : ForwardOperator(sigma) {}
  [[nodiscard]] OperatorKind kind() const override { return OperatorKind::zero; }
  [[nodiscard]] Image apply(const Image& x) const override { return Image(x.rows, x.cols); }
  [[nodiscard]] Image adjoint(const Image& y) const override { return Image(y.rows, y.cols); }
};

// ---------------------------------------------------------------------------
// File formats

/// 8-bit binary PGM (P5); pixels clamped to [0, 1] and scaled to 0..255.
void write_pgm(const std::string& path, const Image& x);
Image read_pgm(const std::string& path);
/// "LDEMF32" magic, u32 height, u32 width, little-endian row-major float32.
void write_ldemf32(const std::string& path, const Image& x);
Image read_ldemf32(const std::string& path);
/// Dispatches on the file magic (LDEMF32 or P5).
Image read_image(const std::string& path);
/// Plain text: k on the first line, then k rows of k decimals.
void write_kernel(const std::string& path, const Kernel& k);
Kernel read_kernel(const std::string& path);

}  // namespace latentdem
