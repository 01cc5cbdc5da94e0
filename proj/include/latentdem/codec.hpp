#pragma once

#include "latentdem/forward.hpp"
#include "latentdem/rng.hpp"
#include "latentdem/types.hpp"

#include <string>

namespace latentdem {

/// Linear stand-in for a latent autoencoder: decode(z) = W z + b reshaped to
/// rows x cols, encode(x) = W^+ (vec(x) - b). W is D x N with D >= N; with a
/// rank-deficient W the decoder is many-to-one on latents, which is the
/// setting the gluing term is meant for.
class LinearCodec {
 public:
  LinearCodec(Mat decode_matrix, Vec offset, int rows, int cols);

  static LinearCodec identity(int rows, int cols);
  /// Gaussian random W with entries scale * N(0,1) and the requested rank
  /// (rank < latent_dim duplicates directions, making decode non-injective).
  static LinearCodec random(int rows, int cols, int latent_dim, int rank, double scale, double offset,
                            RandomStream& rng);
  /// Rows of whitespace-separated decimals, one matrix row per line (D lines of N values).
  static LinearCodec from_file(const std::string& path, int rows, int cols, double offset);

  [[nodiscard]] Image decode(const Vec& z) const;
  [[nodiscard]] Vec encode(const Image& x) const;

  [[nodiscard]] Eigen::Index latent_dim() const { return decode_.cols(); }
  [[nodiscard]] Eigen::Index pixel_dim() const { return decode_.rows(); }
  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] const Mat& decode_matrix() const { return decode_; }
  [[nodiscard]] const Mat& encode_matrix() const { return encode_; }
  [[nodiscard]] const Vec& offset() const { return offset_; }
  [[nodiscard]] bool is_identity() const { return identity_; }

 private:
  Mat decode_;
  Mat encode_;
  Vec offset_;
  int rows_, cols_;
  bool identity_ = false;
};

struct GluingResult {
  double value;
  /// d value / d z0_hat
  Vec gradient;
};

/// r = z0 - E(A^T y + (I - A^T A) D(z0)); value = |r|^2.
GluingResult gluing_residual(const LinearCodec& codec, const Vec& z0_hat, const Image& y, const ForwardOperator& op);

/// Whitespace-separated matrix text (one row per line).
Mat read_matrix(const std::string& path);

}  // namespace latentdem
