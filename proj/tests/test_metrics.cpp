#include <doctest.h>

#include "helpers.hpp"
#include "latentdem/metrics.hpp"

#include <cmath>

using namespace latentdem;
using testing::random_image;
using testing::random_kernel;

TEST_SUITE("metrics") {
  TEST_CASE("psnr") {
    RandomStream rng(1, "p");
    const Image a = random_image(8, 8, rng);
    CHECK(psnr(a, a) == kPsnrCap);
    CHECK(psnr(Image::constant(8, 8, 0.5), Image::constant(8, 8, 0.6)) == doctest::Approx(20.0));
    CHECK(psnr(Image::constant(8, 8, 0.0), Image::constant(8, 8, 1.0)) == doctest::Approx(0.0));
    double prev = kPsnrCap;
    for (double d : {0.01, 0.02, 0.05, 0.1}) {
      const double v = psnr(a, Image(8, 8, a.pixels.array() + d));
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("ssim") {
    RandomStream rng(2, "s");
    const Image a = random_image(16, 16, rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    const double shifted = ssim(a, Image(16, 16, a.pixels.array() + 0.01));
    CHECK(shifted < 1.0);
    CHECK(shifted > 0.9);
    // period-8 zero-mean pattern: every 8x8 window has mean exactly zero
    const Vec tile = rng.normal_vector(64);
    const Vec centered = tile.array() - tile.mean();
    Image z(16, 16);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) z.at(i, j) = centered[(i % 8) * 8 + j % 8];
    const Image neg(16, 16, -z.pixels);
    CHECK(ssim(z, neg) < -0.99);
    CHECK_THROWS_AS(ssim(Image(4, 4), Image(4, 4)), Error);
  }

  TEST_CASE("mnc values") {
    const Kernel d = Kernel::delta(3);
    CHECK(std::abs(mnc(d, d) - 1.0) < 1e-10);
    Kernel a(5), b(5);
    a.at(0, 0) = 1.0;
    b.at(1, 2) = 1.0;
    CHECK(std::abs(mnc(a, b) - 1.0) < 1e-10);
    CHECK(std::abs(mnc(d, Kernel::uniform(3)) - 1.0 / 3.0) < 1e-10);
    CHECK_THROWS_AS(mnc(Kernel(3), d), Error);
  }

  TEST_CASE("mnc symmetry, scale invariance and range") {
    RandomStream rng(3, "m");
    for (int i = 0; i < 20; ++i) {
      const Kernel a = random_kernel(5, rng), b = random_kernel(5, rng);
      const double v = mnc(a, b);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
      CHECK(std::abs(v - mnc(b, a)) < 1e-12);
      Kernel s = a;
      for (auto& e : s.values) e *= 3.7;
      CHECK(std::abs(mnc(s, b) - v) < 1e-12);
    }
  }

  TEST_CASE("mse") {
    RandomStream rng(4, "e");
    const Image a = random_image(6, 6, rng), b = random_image(6, 6, rng);
    CHECK(mse_grid(a, a) == 0.0);
    CHECK(mse_grid(Image::constant(3, 3, 1.0), Image(3, 3)) == 1.0);
    double loop = 0.0;
    for (int i = 0; i < 36; ++i) loop += (a.pixels[i] - b.pixels[i]) * (a.pixels[i] - b.pixels[i]);
    CHECK(mse_grid(a, b) == doctest::Approx(loop / 36.0).epsilon(1e-13));
    CHECK_THROWS_AS(mse_grid(Image(3, 3), Image(3, 4)), Error);
  }
}
