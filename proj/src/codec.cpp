#include "latentdem/codec.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace latentdem {

LinearCodec::LinearCodec(Mat decode_matrix, Vec offset, int rows, int cols)
    : decode_(std::move(decode_matrix)), offset_(std::move(offset)), rows_(rows), cols_(cols) {
  const Eigen::Index d = static_cast<Eigen::Index>(rows) * cols;
  if (decode_.rows() != d) {
    throw Error("codec: decode matrix has " + std::to_string(decode_.rows()) + " rows, image needs " +
                std::to_string(d));
  }
  if (offset_.size() != d) throw Error("codec: offset length mismatch");
  if (decode_.cols() > decode_.rows()) throw Error("codec: latent dimension exceeds pixel dimension");
  encode_ = decode_.completeOrthogonalDecomposition().pseudoInverse();
}

LinearCodec LinearCodec::identity(int rows, int cols) {
  const Eigen::Index d = static_cast<Eigen::Index>(rows) * cols;
  LinearCodec c(Mat::Identity(d, d), Vec::Zero(d), rows, cols);
  c.identity_ = true;
  return c;
}

LinearCodec LinearCodec::random(int rows, int cols, int latent_dim, int rank, double scale, double offset,
                                RandomStream& rng) {
  const Eigen::Index d = static_cast<Eigen::Index>(rows) * cols;
  if (latent_dim < 1 || latent_dim > d) throw Error("codec: latent_dim must be in 1..rows*cols");
  if (rank < 1 || rank > latent_dim) throw Error("codec: rank must be in 1..latent_dim");
  Mat base(d, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) base(i, j) = scale * rng.normal();
  }
  Mat w(d, latent_dim);
  w.leftCols(rank) = base;
  // Extra columns are random combinations of the first `rank` ones.
  for (Eigen::Index j = rank; j < latent_dim; ++j) {
    Vec mix(rank);
    for (Eigen::Index k = 0; k < rank; ++k) mix[k] = rng.normal() / std::sqrt(static_cast<double>(rank));
    w.col(j) = base * mix;
  }
  return LinearCodec(std::move(w), Vec::Constant(d, offset), rows, cols);
}

Mat read_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(f, line);) {
    std::istringstream ls(line);
    std::vector<double> row;
    for (double v; ls >> v;) row.push_back(v);
    if (!ls.eof()) throw Error("'" + path + "': non-numeric entry on line " + std::to_string(rows.size() + 1));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("'" + path + "': empty matrix");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw Error("'" + path + "': ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

LinearCodec LinearCodec::from_file(const std::string& path, int rows, int cols, double offset) {
  Mat w = read_matrix(path);
  return LinearCodec(std::move(w), Vec::Constant(static_cast<Eigen::Index>(rows) * cols, offset), rows, cols);
}

Image LinearCodec::decode(const Vec& z) const {
  if (z.size() != latent_dim()) throw Error("decode: latent has dimension " + std::to_string(z.size()));
  if (identity_) return Image(rows_, cols_, z);
  return Image(rows_, cols_, decode_ * z + offset_);
}

Vec LinearCodec::encode(const Image& x) const {
  if (x.rows != rows_ || x.cols != cols_) throw Error("encode: image shape mismatch");
  if (identity_) return x.pixels;
  return encode_ * (x.pixels - offset_);
}

GluingResult gluing_residual(const LinearCodec& codec, const Vec& z0_hat, const Image& y, const ForwardOperator& op) {
  if (!op.supports_adjoint()) throw Error("gluing_residual: operator has no adjoint");
  const Image x = codec.decode(z0_hat);
  const Image ax = op.apply(x);
  const Image atax = op.adjoint(ax);
  const Image aty = op.adjoint(y);
  Image target(x.rows, x.cols, aty.pixels + x.pixels - atax.pixels);
  const Vec r = z0_hat - codec.encode(target);
  // d/dz0 |r|^2 = 2 (I - W^+ (I - A^T A) W)^T r = 2 (r - W^T (I - A^T A) W^+T r)
  Vec u = codec.is_identity() ? r : Vec(codec.encode_matrix().transpose() * r);
  Image ui(x.rows, x.cols, u);
  const Image atau = op.adjoint(op.apply(ui));
  const Vec proj = u - atau.pixels;
  const Vec back = codec.is_identity() ? proj : Vec(codec.decode_matrix().transpose() * proj);
  return {r.squaredNorm(), 2.0 * (r - back)};
}

}  // namespace latentdem
