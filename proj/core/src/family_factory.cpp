#include "flowbm/family_factory.hpp"

#include <algorithm>
#include <cmath>

#include "flowbm/errors.hpp"

namespace flowbm {

TorusFlowSolution static_torus_solution(const Field2D& u0) {
  TorusFlowSolution sol;
  sol.grid_n = u0.n;
  sol.times = {0.0};
  sol.u = {u0};
  const Fft2D fft(u0.n);
  sol.R = {scalar_curvature_field(fft, u0)};
  const double h = u0.spacing();
  double vol = 0.0;
  for (double v : u0.data) vol += std::exp(v);
  sol.volumes = {vol * h * h};
  return sol;
}

Field2D initial_conformal_factor(const FamilySpec& spec) {
  if (spec.grid_n < 8) throw ResolutionError("torus grid_n must be at least 8");
  Field2D u0 = cosine_field(spec.grid_n, spec.amplitude, spec.mode_k1, spec.mode_k2);
  if (spec.amplitude2 != 0.0) {
    const Field2D extra = cosine_field(spec.grid_n, spec.amplitude2, spec.mode2_k1, spec.mode2_k2);
    for (std::size_t i = 0; i < u0.data.size(); ++i) u0.data[i] += extra.data[i];
  }
  return u0;
}

TorusFlowSolution torus_solution(const FamilySpec& spec) {
  if (!spec.snapshot.empty()) return load_flow_snapshot(spec.snapshot);
  const Field2D u0 = initial_conformal_factor(spec);
  if (spec.frozen || (spec.amplitude == 0.0 && spec.amplitude2 == 0.0)) return static_torus_solution(u0);
  NrfOptions opt;
  opt.t_end = spec.flow_t_end;
  opt.dt = spec.flow_dt > 0.0 ? spec.flow_dt : std::min(1e-3, 0.9 * nrf_max_dt(u0));
  opt.sample_interval = std::max(opt.dt, std::round(0.01 / opt.dt) * opt.dt);
  return solve_nrf(u0, opt);
}

std::shared_ptr<const TorusNrfFamily> make_torus_family(const FamilySpec& spec) {
  return std::make_shared<TorusNrfFamily>(torus_solution(spec));
}

FamilyPtr make_family(const FamilySpec& spec) {
  const std::string& name = spec.name;
  if (name == "euclidean") return std::make_shared<EuclideanFamily>(spec.dim);
  if (name == "sphere") return std::make_shared<SphereFamily>(spec.dim, spec.kappa, spec.radius);
  if (name == "hyperbolic") return std::make_shared<HyperbolicFamily>(spec.dim, spec.kappa, spec.radius);
  if (name == "cigar") {
    if (spec.dim != 2) throw ConfigError("the cigar family is two-dimensional");
    return std::make_shared<CigarFamily>(spec.kappa);
  }
  if (name == "torus_nrf") {
    if (spec.dim != 2) throw ConfigError("the torus family is two-dimensional");
    return make_torus_family(spec);
  }
  if (name == "static_custom") {
    if (spec.dim != 2) throw ConfigError("static_custom is a two-dimensional torus metric");
    const double a = spec.amplitude;
    const int k1 = spec.mode_k1;
    const int k2 = spec.mode_k2;
    auto fn = [a, k1, k2](double, const Vec& x) -> Mat {
      return std::exp(a * std::cos(k1 * x[0] + k2 * x[1])) * Mat::Identity(2, 2);
    };
    return std::make_shared<CustomFamily>("static_custom", 2, fn, MetricFamily::kInfinity, 0.0,
                                          2.0 * std::acos(-1.0), true);
  }
  throw ConfigError("unknown family '" + name + "'");
}

}  // namespace flowbm
