#include <doctest.h>

#include "flowbm/errors.hpp"
#include "flowbm/linalg.hpp"
#include "flowbm/rng.hpp"

using namespace flowbm;

TEST_CASE("symmetric square root") {
  CHECK(max_abs(sym_sqrt(Mat::Identity(3, 3)) - Mat::Identity(3, 3)) < 1e-15);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const Mat s = sym_sqrt(d);
  CHECK(s(0, 0) == doctest::Approx(2.0));
  CHECK(s(1, 1) == doctest::Approx(3.0));
  CHECK(s(0, 1) == 0.0);

  const NoiseStream noise(3, 0);
  for (std::uint32_t trial = 0; trial < 50; ++trial) {
    double a[16];
    noise.normals(trial, 16, a);
    Mat m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = a[4 * i + j];
    const Mat spd = m * m.transpose() + 0.1 * Mat::Identity(4, 4);
    const Mat r = sym_sqrt(spd);
    CHECK((r * r - spd).norm() / spd.norm() <= 1e-12);
    CHECK(max_abs(inv_sym_sqrt(spd) * r - Mat::Identity(4, 4)) < 1e-10);
  }
}

TEST_CASE("square root rejects indefinite matrices") {
  Mat m = Mat::Identity(2, 2);
  m(1, 1) = -1.0;
  CHECK_THROWS_AS(sym_sqrt(m), NotSpdError);
}

TEST_CASE("g-self-adjoint eigenvalues and Gram defect") {
  Mat g = Mat::Identity(2, 2) * 4.0;
  Mat a = Mat::Identity(2, 2);
  a(1, 1) = 8.0;
  const Vec ev = g_self_adjoint_eigenvalues(g, a);
  CHECK(ev[0] == doctest::Approx(0.25));
  CHECK(ev[1] == doctest::Approx(2.0));
  CHECK(gram_defect(Mat::Identity(2, 2) * 0.5, g) == doctest::Approx(0.0).epsilon(1e-15));
}
