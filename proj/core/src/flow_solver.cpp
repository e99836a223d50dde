#include "flowbm/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowbm/errors.hpp"
#include "flowbm/snapshot.hpp"

namespace flowbm {

namespace {

// Real-axis stability limit of classical RK4 is about 2.785.
constexpr double kRk4Limit = 2.7;

double volume_of(const Field2D& u) {
  Field2D e(u.n);
  for (std::size_t k = 0; k < u.data.size(); ++k) e.data[k] = std::exp(u.data[k]);
  const double h = u.spacing();
  return e.sum() * h * h;
}

}  // namespace

double nrf_max_dt(const Field2D& u) {
  const int n = u.n;
  const double h = u.spacing();
  const double emin = std::exp(u.min());
  const double spec_bound = 0.2 * h * h * emin;
  // Largest flat Laplacian eigenvalue on the grid is 2 (n/2)^2.
  const double rk4_bound = kRk4Limit * emin / (0.5 * n * n);
  return std::min(spec_bound, rk4_bound);
}

Field2D scalar_curvature_field(const Fft2D& fft, const Field2D& u) {
  Field2D R = fft.laplacian(u);
  for (std::size_t k = 0; k < R.data.size(); ++k) R.data[k] *= -std::exp(-u.data[k]);
  return R;
}

double curvature_equation_residual(const TorusFlowSolution& sol) {
  if (sol.times.size() < 3) throw ConfigError("the curvature residual needs at least three samples");
  const Fft2D fft(sol.grid_n);
  double residual = 0.0;
  for (std::size_t k = 1; k + 1 < sol.times.size(); ++k) {
    const double span = sol.times[k + 1] - sol.times[k - 1];
    const Field2D& R = sol.R[k];
    const Field2D& u = sol.u[k];
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < R.data.size(); ++i) {
      const double w = std::exp(u.data[i]);
      num += R.data[i] * w;
      den += w;
    }
    const double r = num / den;
    const Field2D lap = fft.laplacian(R);
    for (std::size_t i = 0; i < R.data.size(); ++i) {
      const double dr = (sol.R[k + 1].data[i] - sol.R[k - 1].data[i]) / span;
      const double rhs = std::exp(-u.data[i]) * lap.data[i] + R.data[i] * (R.data[i] - r);
      residual = std::max(residual, std::abs(dr - rhs));
    }
  }
  return residual;
}

double volume_drift(const TorusFlowSolution& sol) {
  double drift = 0.0;
  for (double v : sol.volumes) drift = std::max(drift, std::abs(v / sol.volumes.front() - 1.0));
  return drift;
}

Field2D cosine_field(int grid_n, double amplitude, int k1, int k2) {
  Field2D f(grid_n);
  const double h = f.spacing();
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) f(i, j) = amplitude * std::cos(k1 * i * h + k2 * j * h);
  return f;
}

TorusFlowSolution solve_nrf(const Field2D& u0, const NrfOptions& options) {
  const int n = u0.n;
  if (n < 8) throw ResolutionError("torus grid_n must be at least 8");
  if (!(options.dt > 0.0) || !(options.t_end >= 0.0))
    throw ConfigError("nrf solve needs dt > 0 and t_end >= 0");
  for (double v : u0.data)
    if (!std::isfinite(v)) throw InstabilityError("initial conformal factor is not finite");
  const double dt_max = nrf_max_dt(u0);
  if (options.dt > dt_max)
    throw InstabilityError("dt " + std::to_string(options.dt) + " exceeds the stability bound " +
                           std::to_string(dt_max));

  const int steps = std::max(0, static_cast<int>(std::lround(options.t_end / options.dt)));
  const double dt = steps > 0 ? options.t_end / steps : options.dt;
  const int per_sample =
      std::max(1, static_cast<int>(std::lround(options.sample_interval / dt)));

  Fft2D fft(n);
  TorusFlowSolution sol;
  sol.grid_n = n;
  const double u_init = u0.max_abs();
  const double u_cap = options.growth_limit * u_init;

  auto rhs = [&](const Field2D& u) {
    Field2D R = scalar_curvature_field(fft, u);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < u.data.size(); ++k) {
      const double e = std::exp(u.data[k]);
      num += R.data[k] * e;
      den += e;
    }
    const double r = num / den;
    sol.max_abs_r = std::max(sol.max_abs_r, std::abs(r));
    for (double& v : R.data) v = r - v;
    return R;
  };
  auto store = [&](double t, const Field2D& u) {
    sol.times.push_back(t);
    sol.u.push_back(u);
    sol.R.push_back(scalar_curvature_field(fft, u));
    sol.volumes.push_back(volume_of(u));
  };

  Field2D u = u0;
  store(0.0, u);
  Field2D tmp(n);
  for (int step = 1; step <= steps; ++step) {
    const Field2D k1 = rhs(u);
    for (std::size_t k = 0; k < u.data.size(); ++k) tmp.data[k] = u.data[k] + 0.5 * dt * k1.data[k];
    const Field2D k2 = rhs(tmp);
    for (std::size_t k = 0; k < u.data.size(); ++k) tmp.data[k] = u.data[k] + 0.5 * dt * k2.data[k];
    const Field2D k3 = rhs(tmp);
    for (std::size_t k = 0; k < u.data.size(); ++k) tmp.data[k] = u.data[k] + dt * k3.data[k];
    const Field2D k4 = rhs(tmp);
    for (std::size_t k = 0; k < u.data.size(); ++k)
      u.data[k] += dt / 6.0 * (k1.data[k] + 2.0 * k2.data[k] + 2.0 * k3.data[k] + k4.data[k]);

    const double umax = u.max_abs();
    if (!std::isfinite(umax) || umax > u_cap)
      throw InstabilityError("max|u| = " + std::to_string(umax) + " exceeded " +
                             std::to_string(options.growth_limit) + "x its initial value at t = " +
                             std::to_string(step * dt));
    if (step % per_sample == 0 || step == steps) store(step * dt, u);
  }
  return sol;
}

void save_flow_snapshot(const std::string& path, const TorusFlowSolution& sol) {
  SnapshotData data;
  data.grid_n = sol.grid_n;
  data.times = sol.times;
  data.fields.push_back({"u", sol.u});
  data.fields.push_back({"R", sol.R});
  write_snapshot(path, data);
}

TorusFlowSolution load_flow_snapshot(const std::string& path) {
  SnapshotData data = read_snapshot(path);
  TorusFlowSolution sol;
  sol.grid_n = data.grid_n;
  sol.times = data.times;
  sol.u = data.field("u").frames;
  sol.R = data.field("R").frames;
  for (const Field2D& u : sol.u) sol.volumes.push_back(volume_of(u));
  return sol;
}

// ---------------------------------------------------------------------------

namespace {

bool frames_identical(const std::vector<Field2D>& frames) {
  for (std::size_t k = 1; k < frames.size(); ++k)
    if (frames[k].data != frames.front().data) return false;
  return true;
}

double torus_t_max(const TorusFlowSolution& sol) {
  if (sol.times.empty()) throw SnapshotError("torus flow solution has no samples");
  if (frames_identical(sol.u)) return MetricFamily::kInfinity;
  return sol.times.back();
}

}  // namespace

TorusNrfFamily::TorusNrfFamily(TorusFlowSolution sol)
    : ConformalFamily(2, torus_t_max(sol), 2.0), sol_(std::move(sol)) {
  if (sol_.u.size() != sol_.times.size() || sol_.R.size() != sol_.times.size())
    throw SnapshotError("torus flow solution has inconsistent sample counts");
  static_ = frames_identical(sol_.u);
  flat_ = static_ && sol_.u.front().max_abs() == 0.0;
  if (static_) {
    u_series_ = SpectralSeries({0.0}, {sol_.u.front()});
    r_series_ = SpectralSeries({0.0}, {sol_.R.front()});
  } else {
    u_series_ = SpectralSeries(sol_.times, sol_.u);
    r_series_ = SpectralSeries(sol_.times, sol_.R);
  }
}

void TorusNrfFamily::normalize(ChartPoint& p) const { wrap_torus(p.coords); }

ConformalData TorusNrfFamily::conformal(double t, const ChartPoint& p) const {
  const double x1 = p.coords[0];
  const double x2 = p.coords[1];
  double dt_u = 0.0;
  const FieldEval e = u_series_.evaluate(t, x1, x2, static_ ? nullptr : &dt_u);
  ConformalData c;
  c.w = 0.5 * e.value;
  c.grad = Vec(2);
  c.grad << 0.5 * e.d1, 0.5 * e.d2;
  c.lap = 0.5 * e.lap;
  c.dt_w = 0.5 * dt_u;
  return c;
}

double TorusNrfFamily::distance0(const ChartPoint& a, const ChartPoint& b) const {
  if (!flat_) throw UnsupportedError("torus distance is closed-form only for the flat metric");
  constexpr double period = 2.0 * std::numbers::pi;
  double d2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    double d = std::fmod(std::abs(a.coords[i] - b.coords[i]), period);
    d = std::min(d, period - d);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

FieldEval TorusNrfFamily::scalar_field(double t, const ChartPoint& p) const {
  check_time(t);
  return r_series_.evaluate(t, p.coords[0], p.coords[1]);
}

Vec TorusNrfFamily::scalar_gradient(double t, const ChartPoint& p) const {
  check_time(t);
  check_point(p);
  const FieldEval r = r_series_.evaluate(t, p.coords[0], p.coords[1]);
  const double u = u_series_.evaluate(t, p.coords[0], p.coords[1]).value;
  Vec grad(2);
  grad << r.d1, r.d2;
  return std::exp(-u) * grad;
}

Field2D TorusNrfFamily::grid_u(double t) const {
  check_time(t);
  if (static_) return sol_.u.front();
  int first = 0;
  int count = 0;
  double w[4];
  double dw[4];
  lagrange_weights(sol_.times, t, first, count, w, dw);
  Field2D out(sol_.grid_n);
  for (int a = 0; a < count; ++a)
    for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] += w[a] * sol_.u[first + a].data[k];
  return out;
}

Field2D TorusNrfFamily::grid_dt_u(double t) const {
  check_time(t);
  Field2D out(sol_.grid_n);
  if (static_) return out;
  int first = 0;
  int count = 0;
  double w[4];
  double dw[4];
  lagrange_weights(sol_.times, t, first, count, w, dw);
  for (int a = 0; a < count; ++a)
    for (std::size_t k = 0; k < out.data.size(); ++k)
      out.data[k] += dw[a] * sol_.u[first + a].data[k];
  return out;
}

Vec scalar_curvature_gradient(const TorusFlowSolution& sol, double t, const ChartPoint& p) {
  const TorusNrfFamily family(sol);
  return family.scalar_gradient(t, p);
}

}  // namespace flowbm
