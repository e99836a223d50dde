#include <doctest.h>

#include <cmath>
#include <vector>

#include "flowbm/errors.hpp"
#include "flowbm/rng.hpp"
#include "flowbm/stats.hpp"

using namespace flowbm;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("noise streams are pure functions of seed, path and step") {
  const NoiseStream a(42, 7);
  const NoiseStream b(42, 7);
  const NoiseStream c(42, 8);
  double x[3];
  double y[3];
  double z[3];
  a.normals(11, 3, x);
  b.normals(11, 3, y);
  c.normals(11, 3, z);
  for (int i = 0; i < 3; ++i) {
    CHECK(x[i] == y[i]);
    CHECK(x[i] != z[i]);
  }
  const Vec inc = a.increment(11, 3, 0.25);
  for (int i = 0; i < 3; ++i) CHECK(inc[i] == doctest::Approx(0.5 * x[i]).epsilon(1e-15));
  const double u = a.aux_uniform(0);
  CHECK(u > 0.0);
  CHECK(u < 1.0);
}

TEST_CASE("standard normal moments") {
  const NoiseStream s(1, 0);
  std::vector<double> v(200000);
  for (std::uint32_t k = 0; k < 50000; ++k) s.normals(k, 4, v.data() + 4 * k);
  const MeanStats m = mean_stats(v);
  CHECK(std::abs(m.mean) < 4.0 * m.std_error);
  CHECK(m.variance == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mean statistics and pairwise sums") {
  const MeanStats m = mean_stats({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  std::vector<double> ones(1001, 0.1);
  CHECK(pairwise_sum(ones) == doctest::Approx(100.1).epsilon(1e-14));
}

TEST_CASE("Kolmogorov distribution and two-sample KS") {
  CHECK(kolmogorov_q(1.0) == doctest::Approx(0.26999967).epsilon(1e-6));
  CHECK(kolmogorov_q(1.36) == doctest::Approx(0.0494).epsilon(1e-2));
  const KsResult same = ks_two_sample({1, 2, 3, 4}, {1, 2, 3, 4});
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  const KsResult apart = ks_two_sample({1, 2, 3, 4, 5, 6, 7, 8}, {11, 12, 13, 14, 15, 16, 17, 18});
  CHECK(apart.statistic == 1.0);
  CHECK(apart.p_value < 1e-3);
  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), Error);
  const std::vector<double> cdf = ecdf({3.0, 1.0, 2.0}, {0.5, 1.0, 2.5, 10.0});
  CHECK(cdf == std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
}
