#include <doctest.h>

#include "latentdem/sched.hpp"

#include <cmath>

using namespace latentdem;

TEST_SUITE("sched") {
  TEST_CASE("single step and two step products") {
    const NoiseSchedule one({0.5});
    CHECK(one.alpha(1) == doctest::Approx(0.5));
    CHECK(one.alpha_bar(1) == doctest::Approx(0.5));
    const NoiseSchedule two({0.1, 0.2});
    CHECK(two.alpha_bar(1) == doctest::Approx(0.9));
    CHECK(two.alpha_bar(2) == doctest::Approx(0.72));
    CHECK(two.alpha_bar(0) == 1.0);
  }

  TEST_CASE("linear schedule endpoints and degenerate zero noise") {
    const NoiseSchedule s = build_linear_schedule(1000, 1e-4, 0.02);
    CHECK(s.beta(1) == doctest::Approx(1e-4));
    CHECK(s.beta(1000) == doctest::Approx(0.02));
    for (int t = 1; t <= 1000; ++t) CHECK_LE(s.alpha_bar(t), s.alpha_bar(t - 1));
    const NoiseSchedule z = build_linear_schedule(3, 0.0, 0.0);
    for (int t = 1; t <= 3; ++t) CHECK(z.alpha_bar(t) == 1.0);
    CHECK(build_linear_schedule(1, 0.3, 0.6).beta(1) == doctest::Approx(0.3));
  }

  TEST_CASE("rejects bad schedules") {
    CHECK_THROWS_AS(build_linear_schedule(0, 1e-4, 0.02), Error);
    CHECK_THROWS_AS(build_linear_schedule(10, 1e-4, 1.0), Error);
    CHECK_THROWS_AS(build_linear_schedule(10, 0.1, 0.05), Error);
  }

  TEST_CASE("reverse coefficients") {
    const NoiseSchedule s({0.1, 0.2});
    const ReverseCoeffs c2 = reverse_coeffs(s, 2);
    CHECK(c2.c_z == doctest::Approx(std::sqrt(0.8) * 0.1 / 0.28).epsilon(1e-12));
    CHECK(c2.c_z == doctest::Approx(0.31944).epsilon(1e-4));
    CHECK(c2.c_0 == doctest::Approx(0.67763).epsilon(1e-4));
    CHECK(c2.sigma_tilde == doctest::Approx(std::sqrt(0.2 * 0.1 / 0.28)));
    const ReverseCoeffs c1 = reverse_coeffs(s, 1);
    CHECK(c1.c_z == 0.0);
    CHECK(c1.c_0 == doctest::Approx(1.0));
    CHECK(c1.sigma_tilde == 0.0);
    CHECK_THROWS(reverse_coeffs(s, 0));
    CHECK_THROWS(reverse_coeffs(s, 3));
  }

  TEST_CASE("zero beta step is the identity") {
    const NoiseSchedule z = build_linear_schedule(5, 0.0, 0.0);
    Vec v(3);
    v << 0.3, -1.2, 2.5;
    Vec cur = v;
    for (int t = 5; t >= 1; --t) {
      const ReverseCoeffs c = reverse_coeffs(z, t);
      CHECK(c.c_z == 1.0);
      CHECK(c.c_0 == 0.0);
      CHECK(c.sigma_tilde == 0.0);
      cur = c.c_z * cur + c.c_0 * Vec::Constant(3, 99.0);
    }
    CHECK(cur == v);
    const NoiseSchedule mixed({0.1, 0.0});
    const ReverseCoeffs c = reverse_coeffs(mixed, 2);
    CHECK(c.c_z == doctest::Approx(1.0));
    CHECK(c.c_0 == 0.0);
  }

  TEST_CASE("tweedie estimate") {
    const NoiseSchedule s({0.75});
    Vec z(2), sc(2);
    z << 1, 0;
    sc << -2, 0;
    const Vec out = tweedie_estimate(z, sc, s, 1);
    CHECK(out[0] == doctest::Approx(-1.0));
    CHECK(out[1] == 0.0);

    const NoiseSchedule unit({0.0});
    CHECK(tweedie_estimate(z, sc, unit, 1) == z);

    const NoiseSchedule g({0.36});
    Vec z1(1);
    z1 << 2.0;
    CHECK(tweedie_estimate(z1, -z1, g, 1)[0] == doctest::Approx(1.6));
    CHECK_THROWS(tweedie_estimate(z1, Vec::Zero(2), g, 1));
  }
}
