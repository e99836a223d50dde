#include "flowbm/pde_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flowbm/errors.hpp"
#include "flowbm/snapshot.hpp"

namespace flowbm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRk4Limit = 2.7;
constexpr double kNegligible = 1e-8;

}  // namespace

AmbientFunction AmbientFunction::constant(double c) { return {Kind::kConstant, 0, 0, c}; }
AmbientFunction AmbientFunction::linear(int i) { return {Kind::kLinear, i, i, 1.0}; }
AmbientFunction AmbientFunction::product(int i, int j) {
  if (i == j) throw ConfigError("product test function needs distinct coordinates");
  return {Kind::kProduct, i, j, 1.0};
}
AmbientFunction AmbientFunction::exp(int i) { return {Kind::kExp, i, i, 1.0}; }

int AmbientFunction::degree() const {
  switch (kind_) {
    case Kind::kConstant: return 0;
    case Kind::kLinear: return 1;
    case Kind::kProduct: return 2;
    case Kind::kExp: return -1;
  }
  return -1;
}

double AmbientFunction::sup_norm() const {
  switch (kind_) {
    case Kind::kConstant: return std::abs(c_);
    case Kind::kLinear: return 1.0;
    case Kind::kProduct: return 0.5;
    case Kind::kExp: return std::numbers::e;
  }
  return 0.0;
}

double AmbientFunction::value(const Vec& q) const {
  switch (kind_) {
    case Kind::kConstant: return c_;
    case Kind::kLinear: return q[i_];
    case Kind::kProduct: return q[i_] * q[j_];
    case Kind::kExp: return std::exp(q[i_]);
  }
  return 0.0;
}

Vec AmbientFunction::gradient(const Vec& q) const {
  Vec g = Vec::Zero(q.size());
  switch (kind_) {
    case Kind::kConstant: break;
    case Kind::kLinear: g[i_] = 1.0; break;
    case Kind::kProduct:
      g[i_] = q[j_];
      g[j_] = q[i_];
      break;
    case Kind::kExp: g[i_] = std::exp(q[i_]); break;
  }
  return g;
}

Mat AmbientFunction::hessian(const Vec& q) const {
  const int m = static_cast<int>(q.size());
  Mat h = Mat::Zero(m, m);
  if (kind_ == Kind::kProduct) {
    h(i_, j_) = 1.0;
    h(j_, i_) = 1.0;
  } else if (kind_ == Kind::kExp) {
    h(i_, i_) = std::exp(q[i_]);
  }
  return h;
}

double AmbientFunction::sphere_laplacian(const Vec& q) const {
  const int n = static_cast<int>(q.size()) - 1;
  const Mat h = hessian(q);
  return h.trace() - n * q.dot(gradient(q)) - q.dot(h * q);
}

Mat stereographic_jacobian(const ChartPoint& p) {
  const int n = p.dim();
  const double s = p.coords.squaredNorm();
  const double a = 1.0 + s;
  Mat j(n + 1, n);
  j.topRows(n) = (2.0 / a) * Mat::Identity(n, n) - (4.0 / (a * a)) * (p.coords * p.coords.transpose());
  j.row(n) = (-4.0 / (a * a)) * p.coords.transpose();
  if (p.chart == 1) j.row(n) = -j.row(n);
  return j;
}

Vec HeatSolution::gradient(double t, const ChartPoint& p) const {
  return family().metric(t, p).ldlt().solve(differential(t, p));
}

// ---------------------------------------------------------------------------

SphereHeatSolution::SphereHeatSolution(std::shared_ptr<const SphereFamily> family,
                                       std::vector<AmbientFunction> terms, double sigma)
    : family_(std::move(family)), terms_(std::move(terms)), sigma_(sigma) {
  if (!family_) throw ConfigError("sphere heat solution needs a family");
  for (const AmbientFunction& f : terms_)
    if (f.degree() < 0) throw UnsupportedError("sphere heat oracle needs spherical harmonic terms");
}

double SphereHeatSolution::tau(double t) const {
  family_->check_time(t);
  const int n = family_->dim();
  const double beta = family_->flow_kappa() * (n - 1) / (family_->radius() * family_->radius());
  if (beta == 0.0) return t;
  return -std::log1p(-beta * t) / beta;
}

double SphereHeatSolution::decay(int degree, double t) const {
  const int n = family_->dim();
  const double rho = family_->radius();
  const double lambda = degree * (degree + n - 1) / (rho * rho);
  return std::exp(-0.5 * sigma_ * lambda * tau(t));
}

double SphereHeatSolution::value(double t, const ChartPoint& p) const {
  const Vec q = SphereFamily::ambient(p);
  double v = 0.0;
  for (const AmbientFunction& f : terms_) v += decay(f.degree(), t) * f.value(q);
  return v;
}

Vec SphereHeatSolution::differential(double t, const ChartPoint& p) const {
  const Vec q = SphereFamily::ambient(p);
  Vec grad = Vec::Zero(q.size());
  for (const AmbientFunction& f : terms_) grad += decay(f.degree(), t) * f.gradient(q);
  return stereographic_jacobian(p).transpose() * grad;
}

double SphereHeatSolution::laplacian(double t, const ChartPoint& p) const {
  double v = 0.0;
  for (const AmbientFunction& f : terms_) v += decay(f.degree(), t) * sphere_laplacian_at(*family_, f, t, p);
  return v;
}

double sphere_laplacian_at(const SphereFamily& family, const AmbientFunction& f, double t,
                           const ChartPoint& p) {
  const double rho = family.radius();
  return f.sphere_laplacian(SphereFamily::ambient(p)) / (rho * rho * family.scale(t));
}

// ---------------------------------------------------------------------------

TorusHeatSolution::TorusHeatSolution(std::shared_ptr<const TorusNrfFamily> family,
                                     std::vector<double> times, std::vector<Field2D> frames,
                                     double sigma)
    : family_(std::move(family)),
      times_(std::move(times)),
      frames_(std::move(frames)),
      series_(times_, frames_),
      sigma_(sigma) {}

namespace {

void check_window(const std::vector<double>& times, double t) {
  if (!(t >= times.front() - 1e-12 && t <= times.back() + 1e-12))
    throw TimeRangeError("time " + std::to_string(t) + " outside the solved window");
}

}  // namespace

double TorusHeatSolution::value(double t, const ChartPoint& p) const {
  check_window(times_, t);
  return series_.evaluate(t, p.coords[0], p.coords[1]).value;
}

Vec TorusHeatSolution::differential(double t, const ChartPoint& p) const {
  check_window(times_, t);
  const FieldEval e = series_.evaluate(t, p.coords[0], p.coords[1]);
  Vec d(2);
  d << e.d1, e.d2;
  return d;
}

double TorusHeatSolution::residual(double t, const ChartPoint& p) const {
  check_window(times_, t);
  const FieldEval e = series_.evaluate(t, p.coords[0], p.coords[1]);
  const double u = 2.0 * family_->conformal(t, p).w;
  return series_.time_derivative(t, p.coords[0], p.coords[1]) - 0.5 * sigma_ * std::exp(-u) * e.lap;
}

namespace {

struct StepPlan {
  int steps = 0;
  double dt = 0.0;
  int per_sample = 1;
};

StepPlan plan_steps(double T, const TorusSolveOptions& opt) {
  if (!(T > 0.0)) throw ConfigError("solve horizon must be positive");
  if (!(opt.dt > 0.0)) throw ConfigError("time step must be positive");
  StepPlan plan;
  plan.steps = std::max(1, static_cast<int>(std::lround(T / opt.dt)));
  plan.dt = T / plan.steps;
  plan.per_sample = std::max(1, static_cast<int>(std::lround(opt.sample_interval / plan.dt)));
  return plan;
}

void check_stability(const TorusNrfFamily& fam, double T, double dt, double sigma) {
  double u_min = std::numeric_limits<double>::infinity();
  const auto& sol = fam.solution();
  for (std::size_t k = 0; k < sol.times.size(); ++k)
    if (k == 0 || sol.times[k - 1] <= T) u_min = std::min(u_min, sol.u[k].min());
  const int n = sol.grid_n;
  const double lambda = 0.5 * sigma * std::exp(-u_min) * 0.5 * n * n;
  if (dt * lambda > kRk4Limit)
    throw InstabilityError("dt " + std::to_string(dt) + " exceeds the heat stability bound " +
                           std::to_string(kRk4Limit / lambda));
}

/// Classical RK4 for y' = L(t) y with a callback applying L(t).
template <typename Apply>
void rk4_step(Field2D& y, double t, double dt, Apply&& apply) {
  const Field2D k1 = apply(t, y);
  Field2D tmp = y;
  for (std::size_t i = 0; i < y.data.size(); ++i) tmp.data[i] = y.data[i] + 0.5 * dt * k1.data[i];
  const Field2D k2 = apply(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < y.data.size(); ++i) tmp.data[i] = y.data[i] + 0.5 * dt * k2.data[i];
  const Field2D k3 = apply(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < y.data.size(); ++i) tmp.data[i] = y.data[i] + dt * k3.data[i];
  const Field2D k4 = apply(t + dt, tmp);
  for (std::size_t i = 0; i < y.data.size(); ++i)
    y.data[i] += dt / 6.0 * (k1.data[i] + 2.0 * k2.data[i] + 2.0 * k3.data[i] + k4.data[i]);
}

Field2D exp_field(const Field2D& u, double sign) {
  Field2D out(u.n);
  for (std::size_t i = 0; i < u.data.size(); ++i) out.data[i] = std::exp(sign * u.data[i]);
  return out;
}

}  // namespace

std::shared_ptr<TorusHeatSolution> heat_solve_torus(std::shared_ptr<const TorusNrfFamily> family,
                                                    const Field2D& f0, double T,
                                                    const TorusSolveOptions& opt) {
  if (!family) throw ConfigError("torus heat solve needs a family");
  if (f0.n != family->solution().grid_n) throw ConfigError("initial field grid does not match the flow grid");
  family->check_time(T);
  const StepPlan plan = plan_steps(T, opt);
  check_stability(*family, T, plan.dt, opt.sigma);

  const Fft2D fft(f0.n);
  auto apply = [&](double t, const Field2D& f) {
    Field2D out = fft.laplacian(f);
    const Field2D u = family->grid_u(std::min(t, T));
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= 0.5 * opt.sigma * std::exp(-u.data[i]);
    return out;
  };

  std::vector<double> times{0.0};
  std::vector<Field2D> frames{f0};
  Field2D f = f0;
  for (int k = 0; k < plan.steps; ++k) {
    rk4_step(f, k * plan.dt, plan.dt, apply);
    if (!std::isfinite(f.max_abs())) throw InstabilityError("heat solution became non-finite");
    if ((k + 1) % plan.per_sample == 0 || k + 1 == plan.steps) {
      times.push_back(k + 1 == plan.steps ? T : (k + 1) * plan.dt);
      frames.push_back(f);
    }
  }
  return std::make_shared<TorusHeatSolution>(std::move(family), std::move(times), std::move(frames),
                                             opt.sigma);
}

// ---------------------------------------------------------------------------

double DensityField::mass(std::size_t k) const {
  const double h = values.at(k).spacing();
  double m = 0.0;
  for (std::size_t i = 0; i < values[k].data.size(); ++i) m += values[k].data[i] * weights.at(k).data[i];
  return m * h * h;
}

Field2D DensityField::cell_probabilities(std::size_t k) const {
  Field2D p(grid_n);
  for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] = values.at(k).data[i] * weights.at(k).data[i];
  const Fft2D fft(grid_n);
  Field2D avg = fft.cell_average(p);
  const double area = p.spacing() * p.spacing();
  for (double& v : avg.data) v *= area;
  return avg;
}

double mollifier_width(int grid_n, double requested) {
  const double h = 2.0 * kPi / grid_n;
  return std::max({requested, 2.0 * h, 0.05});
}

namespace {

std::vector<double> wrapped_gaussian_1d(int n, double center, double width) {
  std::vector<double> g(n, 0.0);
  const double h = 2.0 * kPi / n;
  const int images = 4 + static_cast<int>(std::ceil(3.0 * width / (2.0 * kPi)));
  for (int i = 0; i < n; ++i) {
    for (int m = -images; m <= images; ++m) {
      const double d = h * i - center + 2.0 * kPi * m;
      g[i] += std::exp(-0.5 * d * d / (width * width));
    }
    g[i] /= std::sqrt(2.0 * kPi) * width;
  }
  return g;
}

Field2D product_field(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  Field2D f(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f(i, j) = a[i] * b[j];
  return f;
}

}  // namespace

Field2D periodic_gaussian(int grid_n, const Vec& x0, double width) {
  if (!(width > 0.0)) throw ConfigError("Gaussian width must be positive");
  Field2D f = product_field(wrapped_gaussian_1d(grid_n, x0[0], width),
                            wrapped_gaussian_1d(grid_n, x0[1], width));
  const double h = f.spacing();
  const double total = f.sum() * h * h;
  for (double& v : f.data) v /= total;
  return f;
}

Field2D flat_torus_theta_density(int grid_n, const Vec& x0, double width, double sigma, double t) {
  const double s = std::sqrt(width * width + sigma * t);
  return product_field(wrapped_gaussian_1d(grid_n, x0[0], s), wrapped_gaussian_1d(grid_n, x0[1], s));
}

DensityField conjugate_solve_torus(std::shared_ptr<const TorusNrfFamily> family, const Vec& x0,
                                   double T, double requested_width, const TorusSolveOptions& opt) {
  if (!family) throw ConfigError("conjugate heat solve needs a family");
  family->check_time(T);
  const int n = family->solution().grid_n;
  const StepPlan plan = plan_steps(T, opt);
  check_stability(*family, T, plan.dt, opt.sigma);

  DensityField out;
  out.grid_n = n;
  out.mollifier_width = mollifier_width(n, requested_width);

  const Fft2D fft(n);
  auto apply = [&](double t, const Field2D& p) {
    const Field2D u = family->grid_u(std::min(t, T));
    Field2D h(n);
    for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] = p.data[i] * std::exp(-u.data[i]);
    Field2D lap = fft.laplacian(h);
    for (double& v : lap.data) v *= 0.5 * opt.sigma;
    return lap;
  };
  auto record = [&](double t, const Field2D& p) {
    const Field2D u = family->grid_u(t);
    Field2D h(n);
    for (std::size_t i = 0; i < h.data.size(); ++i) {
      double v = p.data[i] * std::exp(-u.data[i]);
      out.min_value = std::min(out.min_value, v);
      if (v < 0.0) {
        if (v < -kNegligible) ++out.clipped;
        v = 0.0;
      }
      h.data[i] = v;
    }
    out.times.push_back(t);
    out.values.push_back(std::move(h));
    out.weights.push_back(exp_field(u, 1.0));
  };

  Field2D p = periodic_gaussian(n, x0, out.mollifier_width);
  record(0.0, p);
  for (int k = 0; k < plan.steps; ++k) {
    rk4_step(p, k * plan.dt, plan.dt, apply);
    if (!std::isfinite(p.max_abs())) throw InstabilityError("conjugate heat solution became non-finite");
    if ((k + 1) % plan.per_sample == 0 || k + 1 == plan.steps)
      record(k + 1 == plan.steps ? T : (k + 1) * plan.dt, p);
  }
  return out;
}

void save_density_field(const std::string& path, const DensityField& field) {
  SnapshotData data;
  data.grid_n = field.grid_n;
  data.times = field.times;
  data.fields.push_back({"h", field.values});
  data.fields.push_back({"weights", field.weights});
  write_snapshot(path, data);
}

DensityField load_density_field(const std::string& path) {
  const SnapshotData data = read_snapshot(path);
  DensityField field;
  field.grid_n = data.grid_n;
  field.times = data.times;
  field.values = data.field("h").frames;
  field.weights = data.field("weights").frames;
  for (const Field2D& f : field.values) field.min_value = std::min(field.min_value, f.min());
  return field;
}

}  // namespace flowbm
