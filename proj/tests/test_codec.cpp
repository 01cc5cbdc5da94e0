#include <doctest.h>

#include "helpers.hpp"
#include "latentdem/codec.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace latentdem;
using testing::fd_gradient;

namespace {

class NoAdjoint final : public ForwardOperator {
 public:
  NoAdjoint() : ForwardOperator(0.1) {}
  [[nodiscard]] OperatorKind kind() const override { return OperatorKind::identity; }
  [[nodiscard]] Image apply(const Image& x) const override { return x; }
  [[nodiscard]] Image adjoint(const Image& y) const override { return y; }
  [[nodiscard]] bool supports_adjoint() const override { return false; }
};

LinearCodec rank_deficient(RandomStream& rng) {
  // 4x4 image, 8-dim latent of rank 5.
  return LinearCodec::random(4, 4, 8, 5, 0.3, 0.2, rng);
}

}  // namespace

TEST_SUITE("codec") {
  TEST_CASE("identity and zero latent") {
    const auto id = LinearCodec::identity(3, 3);
    RandomStream rng(1, "c");
    const Vec z = rng.normal_vector(9);
    CHECK(id.decode(z).pixels == z);
    CHECK(id.encode(id.decode(z)) == z);
    Mat w(6, 2);
    w.setRandom();
    const LinearCodec c(w, Vec::Constant(6, 0.5), 2, 3);
    CHECK(c.decode(Vec::Zero(2)).pixels == Vec::Constant(6, 0.5));
    CHECK_THROWS_AS(c.decode(Vec::Zero(3)), Error);
    CHECK_THROWS_AS(LinearCodec(Mat::Zero(4, 5), Vec::Zero(4), 2, 2), Error);
  }

  TEST_CASE("decode encode decode is decode") {
    RandomStream rng(2, "c");
    Mat w(16, 8);
    for (int j = 0; j < 8; ++j) w.col(j) = rng.normal_vector(16);
    const LinearCodec c(w, rng.normal_vector(16), 4, 4);
    const Vec z = rng.normal_vector(8);
    const Image x = c.decode(z);
    CHECK((c.decode(c.encode(x)).pixels - x.pixels).norm() < 1e-10);
    CHECK((c.encode(x) - z).norm() < 1e-10);
    // encode of an arbitrary image projects onto range(W)
    const Image any(4, 4, rng.normal_vector(16));
    const Vec proj = c.decode(c.encode(any)).pixels - c.offset();
    const Vec dense = w * (w.transpose() * w).inverse() * w.transpose() * (any.pixels - c.offset());
    CHECK((proj - dense).norm() < 1e-10);
  }

  TEST_CASE("rank-deficient random codec") {
    RandomStream rng(3, "c");
    const auto c = rank_deficient(rng);
    Eigen::FullPivLU<Mat> lu(c.decode_matrix());
    CHECK(lu.rank() == 5);
    const Vec z = rng.normal_vector(8);
    const Image x = c.decode(z);
    CHECK((c.decode(c.encode(x)).pixels - x.pixels).norm() < 1e-10);
  }

  TEST_CASE("matrix file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "latentdem_codec_test.txt";
    {
      std::ofstream f(path);
      f << "1 0\n0 1\n1 1\n0 0\n";
    }
    const auto c = LinearCodec::from_file(path.string(), 2, 2, 0.25);
    CHECK(c.latent_dim() == 2);
    Vec z(2);
    z << 2, 3;
    CHECK(c.decode(z).pixels[2] == doctest::Approx(5.25));
    {
      std::ofstream f(path);
      f << "1 x\n";
    }
    CHECK_THROWS_AS(read_matrix(path.string()), Error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_matrix(path.string()), Error);
  }

  TEST_CASE("gluing vanishes on consistent states") {
    RandomStream rng(4, "g");
    const auto id = LinearCodec::identity(4, 4);
    const Vec z0 = rng.normal_vector(16);
    CHECK(gluing_residual(id, z0, id.decode(z0), IdentityOperator(0.1)).value == 0.0);
    CHECK(gluing_residual(id, z0, Image(4, 4, rng.normal_vector(16)), ZeroOperator(0.1)).value < 1e-28);
    Mat w(16, 6);
    for (int j = 0; j < 6; ++j) w.col(j) = rng.normal_vector(16);
    const LinearCodec inj(w, Vec::Constant(16, 0.3), 4, 4);
    const Vec z1 = rng.normal_vector(6);
    CHECK(gluing_residual(inj, z1, inj.decode(z1), IdentityOperator(0.1)).value < 1e-20);
    CHECK(gluing_residual(inj, z1, Image(4, 4, rng.normal_vector(16)), ZeroOperator(0.1)).value < 1e-20);
    CHECK_THROWS_AS(gluing_residual(inj, z1, inj.decode(z1), NoAdjoint()), Error);
  }

  TEST_CASE("gluing value matches dense evaluation and gradient matches finite differences") {
    RandomStream rng(5, "g");
    for (int trial = 0; trial < 50; ++trial) {
      const auto c = rank_deficient(rng);
      const Kernel k = testing::random_kernel(3, rng);
      const ConvolutionOperator op(k, 4, 4, 0.1);
      const Image y(4, 4, rng.normal_vector(16));
      const Vec z0 = rng.normal_vector(8);

      Mat a(16, 16);
      for (int i = 0; i < 16; ++i) {
        Image e(4, 4);
        e.pixels[i] = 1.0;
        a.col(i) = op.apply(e).pixels;
      }
      const Mat& w = c.decode_matrix();
      const Vec target = a.transpose() * y.pixels +
                         (Mat::Identity(16, 16) - a.transpose() * a) * (w * z0 + c.offset());
      const Vec r = z0 - c.encode_matrix() * (target - c.offset());
      const GluingResult g = gluing_residual(c, z0, y, op);
      CHECK(std::abs(g.value - r.squaredNorm()) <= 1e-10 * std::max(1.0, r.squaredNorm()));

      const Vec fd = fd_gradient([&](const Vec& v) { return gluing_residual(c, v, y, op).value; }, z0);
      CHECK((g.gradient - fd).norm() < 1e-4 * std::max(1.0, fd.norm()));
    }
  }
}
