#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "flowbm/errors.hpp"
#include "flowbm/family_factory.hpp"
#include "flowbm/flow_solver.hpp"
#include "flowbm/snapshot.hpp"

using namespace flowbm;

namespace {

ChartPoint pt(double a, double b) {
  Vec x(2);
  x << a, b;
  return ChartPoint(0, x);
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("flat torus is a fixed point") {
  NrfOptions opt;
  opt.t_end = 0.2;
  const TorusFlowSolution sol = solve_nrf(Field2D(16), opt);
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    CHECK(sol.u[k].max_abs() == 0.0);
    CHECK(sol.R[k].max_abs() == 0.0);
  }
  const TorusNrfFamily fam(sol);
  CHECK(fam.scalar_gradient(0.1, pt(1.0, 2.0)).norm() == 0.0);
}

TEST_CASE("small-amplitude flow follows the linearization") {
  NrfOptions opt;
  opt.t_end = 1.0;
  const TorusFlowSolution sol = solve_nrf(cosine_field(32, 0.05), opt);
  const Field2D& u = sol.u.back();
  double err = 0.0;
  double ref = 0.0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const double lin = 0.05 * std::exp(-1.0) * std::cos(u.node(i));
      err = std::max(err, std::abs(u(i, j) - lin));
      ref = std::max(ref, std::abs(lin));
    }
  CHECK(err / ref <= 0.05);
}

TEST_CASE("flow invariants") {
  NrfOptions opt;
  opt.t_end = 0.5;
  Field2D u0 = cosine_field(32, 0.3, 1, 1);
  const TorusFlowSolution sol = solve_nrf(u0, opt);
  CHECK(sol.max_abs_r <= 1e-8);
  CHECK(volume_drift(sol) <= 1e-6);
  const double u_start = sol.u.front().max_abs();
  for (std::size_t k = 1; k < sol.times.size(); ++k) {
    CHECK(sol.u[k].max_abs() <= sol.u[k - 1].max_abs() + 0.05 * u_start);
    for (double v : sol.R[k].data) CHECK(std::isfinite(v));
  }
}

TEST_CASE("stability guard") {
  NrfOptions opt;
  opt.t_end = 0.1;
  opt.dt = 0.05;
  opt.sample_interval = 0.05;
  CHECK_THROWS_AS(solve_nrf(cosine_field(32, 0.2), opt), InstabilityError);
  CHECK_THROWS_AS(solve_nrf(Field2D(4), NrfOptions{}), ResolutionError);
}

TEST_CASE("curvature equation residual on a fine solve") {
  NrfOptions opt;
  opt.t_end = 0.1;
  opt.dt = 5e-4;
  opt.sample_interval = 5e-4;
  FamilySpec spec;
  spec.grid_n = 64;
  spec.amplitude2 = 0.1;
  CHECK(curvature_equation_residual(solve_nrf(initial_conformal_factor(spec), opt)) <= 1e-3);
}

TEST_CASE("scalar-curvature gradient against finite differences") {
  NrfOptions opt;
  opt.t_end = 0.3;
  const TorusNrfFamily fam(solve_nrf(cosine_field(32, 0.2, 1, 1), opt));
  const ChartPoint p = pt(0.9, 2.1);
  const double t = 0.17;
  const Vec grad = fam.scalar_gradient(t, p);
  const double h = 1e-5;
  Vec fd(2);
  for (int i = 0; i < 2; ++i) {
    ChartPoint a = p;
    ChartPoint b = p;
    a.coords[i] += h;
    b.coords[i] -= h;
    fd[i] = (fam.scalar_field(t, a).value - fam.scalar_field(t, b).value) / (2.0 * h);
  }
  const double w = std::exp(-fam.conformal(t, p).w * 2.0);
  CHECK((grad - w * fd).norm() / grad.norm() <= 1e-4);
  // single mode along x1 + x2: the gradient is parallel to (1, 1)
  CHECK(std::abs(grad[0] - grad[1]) <= 1e-10 * grad.norm());
}

TEST_CASE("interpolation reproduces a skipped sample") {
  NrfOptions dense;
  dense.t_end = 0.2;
  dense.sample_interval = 0.005;
  const TorusFlowSolution full = solve_nrf(cosine_field(32, 0.2), dense);
  TorusFlowSolution thin = full;
  thin.times.clear();
  thin.u.clear();
  thin.R.clear();
  thin.volumes.clear();
  for (std::size_t k = 0; k < full.times.size(); k += 2) {
    thin.times.push_back(full.times[k]);
    thin.u.push_back(full.u[k]);
    thin.R.push_back(full.R[k]);
    thin.volumes.push_back(full.volumes[k]);
  }
  const TorusNrfFamily fam(thin);
  const Field2D u = fam.grid_u(full.times[5]);
  double err = 0.0;
  for (std::size_t i = 0; i < u.data.size(); ++i) err = std::max(err, std::abs(u.data[i] - full.u[5].data[i]));
  CHECK(err <= 1e-6);
}

TEST_CASE("snapshot round trip and corruption") {
  NrfOptions opt;
  opt.t_end = 0.05;
  const TorusFlowSolution sol = solve_nrf(cosine_field(16, 0.2), opt);
  const std::string path = temp_path("flowbm_unit_flow.snapshot");
  save_flow_snapshot(path, sol);
  const TorusFlowSolution back = load_flow_snapshot(path);
  REQUIRE(back.times == sol.times);
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    CHECK(back.u[k].data == sol.u[k].data);
    CHECK(back.R[k].data == sol.R[k].data);
  }
  const TorusNrfFamily fam(back);
  const ChartPoint p = pt(sol.u[0].node(3), sol.u[0].node(5));
  CHECK(fam.metric(sol.times[2], p)(0, 0) == doctest::Approx(std::exp(sol.u[2](3, 5))).epsilon(1e-6));

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size / 2);
  CHECK_THROWS_AS(load_flow_snapshot(path), SnapshotError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "not a snapshot";
  }
  CHECK_THROWS_AS(read_snapshot(path), SnapshotError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_snapshot(path), SnapshotError);
}
