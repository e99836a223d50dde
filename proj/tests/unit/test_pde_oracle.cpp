#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <memory>

#include "flowbm/errors.hpp"
#include "flowbm/estimators.hpp"
#include "flowbm/family_factory.hpp"
#include "flowbm/pde_oracle.hpp"

using namespace flowbm;

namespace {

ChartPoint pt(double a, double b, int chart = 0) {
  Vec x(2);
  x << a, b;
  return ChartPoint(chart, x);
}

std::shared_ptr<const TorusNrfFamily> flat_torus(int n = 32) {
  return std::make_shared<TorusNrfFamily>(static_torus_solution(Field2D(n)));
}

}  // namespace

TEST_CASE("flat torus heat: single mode and constants") {
  const auto flat = flat_torus();
  Field2D f0(32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) f0(i, j) = std::cos(f0.node(i));
  const auto heat = heat_solve_torus(flat, f0, 1.0);
  for (double t : {0.0, 0.37, 1.0}) {
    const ChartPoint p = pt(0.8, 2.0);
    CHECK(std::abs(heat->value(t, p) - std::exp(-0.5 * t) * std::cos(0.8)) <= 1e-8);
    CHECK(heat->differential(t, p)[0] == doctest::Approx(-std::exp(-0.5 * t) * std::sin(0.8)).epsilon(1e-8));
  }
  const auto constant = heat_solve_torus(flat, Field2D(32, 2.0), 1.0);
  CHECK(constant->value(0.6, pt(1.0, 1.0)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(heat_solve_torus(flat, Field2D(16), 1.0), ConfigError);
}

TEST_CASE("torus heat stability guard") {
  TorusSolveOptions opt;
  opt.dt = 0.1;
  opt.sample_interval = 0.1;
  CHECK_THROWS_AS(heat_solve_torus(flat_torus(), Field2D(32, 1.0), 1.0, opt), InstabilityError);
}

TEST_CASE("conjugate heat on the flat torus is the wrapped Gaussian") {
  Vec x0(2);
  x0 << 1.0, 5.0;
  TorusSolveOptions opt;
  opt.sample_interval = 0.1;
  const DensityField d = conjugate_solve_torus(flat_torus(), x0, 0.5, 0.0, opt);
  CHECK(d.mollifier_width == doctest::Approx(std::max(0.05, 2.0 * 2.0 * M_PI / 32)));
  const Field2D theta = flat_torus_theta_density(32, x0, d.mollifier_width, 1.0, 0.5);
  double err = 0.0;
  for (std::size_t i = 0; i < theta.data.size(); ++i) err = std::max(err, std::abs(theta.data[i] - d.values.back().data[i]));
  CHECK(err <= 1e-6);
  for (std::size_t k = 0; k < d.times.size(); ++k) CHECK(std::abs(d.mass(k) - 1.0) <= 1e-6);
  const Field2D cells = d.cell_probabilities(d.times.size() - 1);
  CHECK(cells.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conjugate heat conserves mass along the torus flow") {
  FamilySpec spec;
  spec.name = "torus_nrf";
  spec.flow_t_end = 0.6;
  Vec x0(2);
  x0 << 3.0, 3.0;
  TorusSolveOptions opt;
  opt.sample_interval = 0.05;
  const DensityField d = conjugate_solve_torus(make_torus_family(spec), x0, 0.5, 0.0, opt);
  for (std::size_t k = 0; k < d.times.size(); ++k) CHECK(std::abs(d.mass(k) - 1.0) <= 1e-6);
  CHECK(d.clipped == 0);

  const std::string path = (std::filesystem::temp_directory_path() / "flowbm_unit_density.snapshot").string();
  save_density_field(path, d);
  const DensityField back = load_density_field(path);
  CHECK(back.times == d.times);
  CHECK(back.values.back().data == d.values.back().data);
  CHECK(back.weights.front().data == d.weights.front().data);
  std::filesystem::remove(path);
}

TEST_CASE("trace term on the kappa = 1 torus flow") {
  FamilySpec spec;
  spec.name = "torus_nrf";
  spec.flow_t_end = 1.0;
  const ReparametrizedFamily ricci(make_torus_family(spec), 1.0, 2.0);
  for (double t : {0.05, 0.5, 1.5}) {
    const LocalGeometry g = ricci.local(t, pt(0.3, 4.0));
    CHECK(std::abs(0.5 * g.dt_g_sharp.trace() + 0.5 * g.scalar) <= 1e-6);
  }
}

TEST_CASE("sphere oracle: time change and decay") {
  auto sph = std::make_shared<SphereFamily>(2, 2.0);
  const SphereHeatSolution heat(sph, {AmbientFunction::linear(2)});
  CHECK(heat.tau(0.2) == doctest::Approx(std::log(0.6) / -2.0).epsilon(1e-14));
  CHECK(heat.decay(1, 0.2) == doctest::Approx(std::exp(-0.5 * 2.0 * std::log(0.6) / -2.0)).epsilon(1e-14));
  CHECK(heat.tau(0.0) == 0.0);
  const ChartPoint p = pt(0.4, -0.3);
  const Vec q = SphereFamily::ambient(p);
  CHECK(heat.value(0.0, p) == doctest::Approx(q[2]).epsilon(1e-15));
  CHECK(heat.value(1e-9, p) == doctest::Approx(q[2]).epsilon(1e-8));
  const SphereHeatSolution constant(sph, {AmbientFunction::constant(3.0)});
  CHECK(constant.value(0.2, p) == 3.0);
  CHECK(constant.differential(0.2, p).norm() == 0.0);
  CHECK_THROWS_AS(heat.value(0.49, p), TimeRangeError);
}

TEST_CASE("ambient Laplacian of spherical harmonics") {
  const Vec q = SphereFamily::ambient(pt(0.2, 0.7));
  CHECK(AmbientFunction::linear(0).sphere_laplacian(q) == doctest::Approx(-2.0 * q[0]));
  CHECK(AmbientFunction::product(0, 2).sphere_laplacian(q) == doctest::Approx(-6.0 * q[0] * q[2]));
  CHECK(AmbientFunction::linear(1).degree() == 1);
  CHECK(AmbientFunction::product(0, 1).degree() == 2);
  CHECK(AmbientFunction::exp(0).degree() == -1);
}

TEST_CASE("oracle self-consistency suite") {
  const EstimatorReport r = oracle_selftest();
  CHECK(r.passed());
  CHECK(r.diagnostics.at("duality_gap") <= 1e-5);
  CHECK(r.diagnostics.at("torus_heat_residual") <= 1e-6);
}
