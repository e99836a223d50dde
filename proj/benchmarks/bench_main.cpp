#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "flowbm/estimators.hpp"
#include "flowbm/family_factory.hpp"
#include "flowbm/linalg.hpp"
#include "flowbm/rng.hpp"
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
  c.seed = 1;
  return c;
}

std::shared_ptr<const TorusNrfFamily> nrf_family() {
  static const auto fam = [] {
    FamilySpec spec;
    spec.name = "torus_nrf";
    spec.flow_t_end = 0.6;
    return make_torus_family(spec);
  }();
  return fam;
}

}  // namespace

static void BM_Philox(benchmark::State& state) {
  Philox4x32::Counter c{0, 0, 0, 0};
  for (auto _ : state) {
    c = Philox4x32::apply(c, {1, 2});
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_Philox);

static void BM_SymSqrt(benchmark::State& state) {
  Mat m(2, 2);
  m << 2.0, 0.3, 0.3, 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(sym_sqrt(m));
}
BENCHMARK(BM_SymSqrt);

static void BM_SphereLocalGeometry(benchmark::State& state) {
  const SphereFamily s(2, 2.0);
  const ChartPoint p = pt(0.3, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(s.local(0.1, p));
}
BENCHMARK(BM_SphereLocalGeometry);

static void BM_TorusLocalGeometry(benchmark::State& state) {
  const auto fam = nrf_family();
  const ChartPoint p = pt(1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(fam->local(0.25, p));
}
BENCHMARK(BM_TorusLocalGeometry);

static void BM_SpherePath(benchmark::State& state) {
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 2.0), 0.2, static_cast<int>(state.range(0)),
                           TimeDirection::kForward);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_endpoint(c, pt(0.3, 0.2), i++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpherePath)->Arg(200)->Arg(1000);

static void BM_SphereFrameTransport(benchmark::State& state) {
  const SimConfig c = make(std::make_shared<SphereFamily>(2, 2.0), 0.2, 200, TimeDirection::kForward);
  const PathSample path = simulate_path(c, pt(0.3, 0.2), 0);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_frame(c, path));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_SphereFrameTransport);

static void BM_TorusPhiTransport(benchmark::State& state) {
  SimConfig c = make(nrf_family(), 0.5, 500, TimeDirection::kReversed);
  c.sigma = 2.0;
  const PathSample path = simulate_path(c, pt(1.0, 0.5), 0);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_phi(c, path));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_TorusPhiTransport);

static void BM_BismutFlatTorus(benchmark::State& state) {
  const auto flat = std::make_shared<TorusNrfFamily>(static_torus_solution(Field2D(32)));
  const SimConfig c = make(flat, 0.5, 500, TimeDirection::kReversed);
  const PointFn f0 = [](const ChartPoint& p) { return std::cos(p.coords[0]); };
  for (auto _ : state) benchmark::DoNotOptimize(bismut_samples(c, f0, pt(1.0, 2.0), {100, 1}));
  state.SetItemsProcessed(state.iterations() * 100 * 500);
}
BENCHMARK(BM_BismutFlatTorus)->Unit(benchmark::kMillisecond);

static void BM_NrfSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Field2D u0 = cosine_field(n, 0.2);
  NrfOptions opt;
  opt.t_end = 0.1;
  opt.dt = std::min(1e-3, 0.9 * nrf_max_dt(u0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_nrf(u0, opt));
}
BENCHMARK(BM_NrfSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_ConjugateSolve(benchmark::State& state) {
  Vec x0(2);
  x0 << 3.0, 3.0;
  TorusSolveOptions opt;
  opt.sample_interval = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(conjugate_solve_torus(nrf_family(), x0, 0.5, 0.0, opt));
}
BENCHMARK(BM_ConjugateSolve)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
