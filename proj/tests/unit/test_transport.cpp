#include <doctest.h>

#include <cmath>
#include <memory>

#include "flowbm/family_factory.hpp"
#include "flowbm/linalg.hpp"
#include "flowbm/transport.hpp"

using namespace flowbm;

namespace {

ChartPoint pt(double a, double b) {
  Vec x(2);
  x << a, b;
  return ChartPoint(0, x);
}

SimConfig make(FamilyPtr f, double T, int steps, TimeDirection dir) {
  SimConfig c;
  c.family = std::move(f);
  c.T = T;
  c.n_steps = steps;
  c.direction = dir;
  c.seed = 7;
  return c;
}

std::shared_ptr<const TorusNrfFamily> flat_torus() {
  return std::make_shared<TorusNrfFamily>(static_torus_solution(Field2D(16)));
}

}  // namespace

TEST_CASE("flat frames stay constant") {
  const SimConfig c = make(std::make_shared<EuclideanFamily>(2), 1.0, 100, TimeDirection::kForward);
  const TransportTrace t = evolve_frame(c, simulate_path(c, pt(0.0, 0.0), 0));
  for (const Mat& u : t.frame) CHECK(max_abs(u - t.frame.front()) == 0.0);
  const EquivalenceGap gap = equivalence_gap(c, simulate_path(c, pt(0.0, 0.0), 0),
                                             evolve_transports(c, simulate_path(c, pt(0.0, 0.0), 0),
                                                               {true, true, false, false}));
  CHECK(gap.gap_w <= 1e-10);
  CHECK(gap.gap_tx <= 1e-10);
}

TEST_CASE("static round sphere: stochastic parallel transport stays orthonormal") {
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 0.0), 1.0, 1000, TimeDirection::kForward);
  const TransportTrace t = evolve_frame(c, simulate_path(c, pt(0.2, 0.1), 3));
  CHECK(t.max_gram_defect <= 10.0 * c.dt());
}

TEST_CASE("shrinking sphere: g(0)-norm of a frame column grows like c(t)^(-1/2)") {
  auto fam = std::make_shared<SphereFamily>(2, 2.0);
  const SimConfig c = make(fam, 0.3, 3000, TimeDirection::kForward);
  const PathSample path = simulate_path(c, pt(0.1, 0.1), 1);
  const TransportTrace t = evolve_frame(c, path);
  const int k = c.n_steps;
  const Vec col = t.frame[k].col(0);
  const double n0 = std::sqrt(col.dot(fam->metric(0.0, path.points[k]) * col));
  const double nt = std::sqrt(col.dot(fam->metric(c.T, path.points[k]) * col));
  CHECK(nt == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(n0 == doctest::Approx(1.0 / std::sqrt(1.0 - 2.0 * c.T)).epsilon(1e-2));
}

TEST_CASE("Ricci flow: damped and variation transports equal parallel transport") {
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 1.0), 0.5, 500, TimeDirection::kReversed);
  const PathSample path = simulate_path(c, pt(0.3, 0.2), 2);
  const TransportTrace t = evolve_transports(c, path, {true, true, false, false});
  const EquivalenceGap gap = equivalence_gap(c, path, t);
  CHECK(gap.gap_w <= 1e-12);
  CHECK(gap.gap_tx <= 1e-12);
}

TEST_CASE("static round sphere: variation transport drifts by the scalar ODE") {
  // On the unit sphere Ric^# = Id, so par^{-1} W = exp(-T/2) Id, and gap_TX = 1 - exp(-T/2).
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 0.0), 1.0, 1000, TimeDirection::kReversed);
  const PathSample path = simulate_path(c, pt(0.3, 0.2), 4);
  const TransportTrace t = evolve_transports(c, path, {true, true, false, false});
  const EquivalenceGap gap = equivalence_gap(c, path, t);
  const double exact = 1.0 - std::exp(-0.5);
  CHECK(gap.gap_w == doctest::Approx(exact).epsilon(1e-2));
  CHECK(gap.gap_tx == doctest::Approx(exact).epsilon(1e-2));
  CHECK(gap.gap_tx >= 0.1);
}

TEST_CASE("flat torus: phi is the identity and theta is exponential") {
  const SimConfig c = make(flat_torus(), 0.5, 200, TimeDirection::kReversed);
  const PathSample path = simulate_path(c, pt(1.0, 2.0), 0);
  const TransportTrace phi = evolve_phi(c, path);
  CHECK(max_abs(phi.phi(c.n_steps) - Mat::Identity(2, 2)) <= 1e-12);
  const double rate = 0.7;
  const TransportTrace theta = evolve_theta(c, path, [rate](double, const ChartPoint&) { return rate; });
  const Mat q = theta.theta(c.n_steps);
  CHECK(q(0, 0) == doctest::Approx(std::exp(rate * c.T)).epsilon(1e-2));
  CHECK(std::abs(q(0, 1)) <= 1e-12);
}

TEST_CASE("torus flow: log |phi| integrates 2R along the path") {
  FamilySpec spec;
  spec.name = "torus_nrf";
  spec.flow_t_end = 0.6;
  const auto fam = make_torus_family(spec);
  SimConfig c = make(fam, 0.5, 2000, TimeDirection::kReversed);
  c.sigma = 2.0;
  const PathSample path = simulate_path(c, pt(1.0, 0.5), 0);
  const TransportTrace t = evolve_phi(c, path);
  double integral = 0.0;
  for (int k = 0; k < c.n_steps; ++k) {
    const double r0 = fam->scalar_field(metric_clock(c, path.times[k]), path.points[k]).value;
    const double r1 = fam->scalar_field(metric_clock(c, path.times[k + 1]), path.points[k + 1]).value;
    integral += 0.5 * (r0 + r1) * (path.times[k + 1] - path.times[k]);
  }
  // phi_T v has g(0)-norm^2 = |v|^2_{g(T)} exp(int 4R ds) for a unit vector.
  const Mat phi = t.phi(c.n_steps);
  Vec v(2);
  v << 1.0, 0.0;
  const Vec w = phi * v;
  const double lhs = w.dot(fam->metric(0.0, path.points.back()) * w);
  const double rhs = v.dot(fam->metric(c.T, path.points.front()) * v) * std::exp(4.0 * integral);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-2));
}

TEST_CASE("frame drift guard") {
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 2.0), 0.4, 10, TimeDirection::kForward);
  TransportOptions opt;
  opt.tol_frame = 1e-12;
  CHECK_THROWS(evolve_transports(c, simulate_path(c, pt(0.5, 0.5), 0), opt));
}
