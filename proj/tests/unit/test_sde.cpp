#include <doctest.h>

#include <cmath>
#include <memory>

#include "flowbm/errors.hpp"
#include "flowbm/sde.hpp"

using namespace flowbm;

namespace {

ChartPoint pt(double a, double b) {
  Vec x(2);
  x << a, b;
  return ChartPoint(0, x);
}

SimConfig make(FamilyPtr f, double T, int steps, TimeDirection dir = TimeDirection::kForward) {
  SimConfig c;
  c.family = std::move(f);
  c.T = T;
  c.n_steps = steps;
  c.direction = dir;
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("metric clock") {
  SimConfig c = make(std::make_shared<EuclideanFamily>(2), 1.0, 10);
  CHECK(metric_clock(c, 0.2) == 0.2);
  c.direction = TimeDirection::kReversed;
  CHECK(metric_clock(c, 0.2) == doctest::Approx(0.8));
  CHECK(metric_clock(c, 1.0) == 0.0);
}

TEST_CASE("Euler step on flat space and at the stereographic origin") {
  const SimConfig flat = make(std::make_shared<EuclideanFamily>(2), 1.0, 10);
  Vec dw(2);
  dw << 0.3, -0.1;
  const ChartPoint x = em_step(flat, 0.0, pt(1.0, 2.0), dw, 0.1);
  CHECK(x.coords[0] == 1.3);
  CHECK(x.coords[1] == 1.9);
  CHECK((em_step(flat, 0.0, pt(1.0, 2.0), Vec::Zero(2), 0.0).coords - pt(1.0, 2.0).coords).norm() == 0.0);

  const SimConfig sph = make(std::make_shared<SphereFamily>(2, 2.0), 0.3, 10);
  const double s = 0.1;
  const ChartPoint y = em_step(sph, s, pt(0.0, 0.0), dw, 1e-3);
  const double scale = std::pow(1.0 - 2.0 * s, -0.5) * 0.5;
  CHECK(y.coords[0] == doctest::Approx(scale * dw[0]).epsilon(1e-13));
  CHECK(y.coords[1] == doctest::Approx(scale * dw[1]).epsilon(1e-13));
}

TEST_CASE("paths are replayable and well formed") {
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 2.0), 0.2, 200);
  const PathSample a = simulate_path(c, pt(0.9, 0.8), 5);
  const PathSample b = simulate_path(c, pt(0.9, 0.8), 5);
  REQUIRE(a.points.size() == 201);
  CHECK(a.times.front() == 0.0);
  CHECK(a.times.back() == 0.2);
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    CHECK(a.points[k].coords == b.points[k].coords);
    CHECK(a.points[k].chart == b.points[k].chart);
    CHECK(a.points[k].finite());
    if (k > 0) CHECK(a.times[k] > a.times[k - 1]);
  }
  const ChartPoint end = simulate_endpoint(c, pt(0.9, 0.8), 5);
  CHECK(end.coords == a.points.back().coords);
  const NoiseStream noise(c.seed, 5);
  CHECK(a.dW[17] == noise.increment(17, 2, c.dt()));
  const auto many = simulate_endpoints(c, pt(0.9, 0.8), 8, 3);
  CHECK(many[5].coords == end.coords);
}

TEST_CASE("flat Brownian second moment") {
  const SimConfig c = make(std::make_shared<EuclideanFamily>(2), 1.0, 10);
  const auto ends = simulate_endpoints(c, pt(0.0, 0.0), 10000, 1);
  std::vector<double> sq;
  for (const auto& e : ends) sq.push_back(e.coords.squaredNorm());
  const MeanStats m = mean_stats(sq);
  CHECK(std::abs(m.mean - 2.0) <= 3.0 * m.std_error);
}

TEST_CASE("scaling with c = 1 and flat scaling") {
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 2.0), 0.2, 100);
  const ScalingReport same = scaling_check(c, 1.0, pt(0.3, 0.2), 500);
  CHECK(same.same_seed_max_diff <= 1e-12);
  const SimConfig flat = make(std::make_shared<EuclideanFamily>(2), 1.0, 20);
  CHECK(scaling_check(flat, 3.0, pt(0.0, 0.0), 5000).ks.p_value > 0.01);
}

TEST_CASE("configuration validation") {
  SimConfig c = make(std::make_shared<SphereFamily>(2, 2.0), 0.49, 100);
  CHECK_THROWS_AS(validate(c), TimeRangeError);
  c.T = 0.2;
  c.n_steps = 5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.n_steps = 100;
  c.sigma = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}
