#include "flowbm/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "flowbm/errors.hpp"
#include "flowbm/linalg.hpp"

namespace flowbm {

double MetricFamily::time_limit() const {
  if (data_backed()) return t_max_;
  if (finite_lifetime()) return 0.95 * t_max_;
  return kInfinity;
}

void MetricFamily::check_time(double t) const {
  if (!std::isfinite(t) || t < 0.0)
    throw TimeRangeError("metric time " + std::to_string(t) + " is negative or not finite");
  if (data_backed()) {
    if (t > t_max_ * (1.0 + 1e-12) + 1e-12)
      throw TimeRangeError("metric time " + std::to_string(t) + " beyond stored range " +
                           std::to_string(t_max_));
    return;
  }
  if (t >= t_max_)
    throw TimeRangeError("metric time " + std::to_string(t) + " at or beyond lifetime " +
                         std::to_string(t_max_));
  if (finite_lifetime() && t > 0.95 * t_max_)
    throw TimeRangeError("metric time " + std::to_string(t) + " within 5% of lifetime " +
                         std::to_string(t_max_));
}

void MetricFamily::check_point(const ChartPoint& p) const {
  if (p.chart < 0 || p.chart >= chart_count())
    throw DomainError("invalid chart id " + std::to_string(p.chart) + " for " + name());
  if (p.dim() != dim_)
    throw DomainError("point has dimension " + std::to_string(p.dim()) + ", family has " +
                      std::to_string(dim_));
  if (!p.finite()) throw DomainError("point has non-finite coordinates");
  if (!in_domain(p)) throw DomainError("point outside the chart domain of " + name());
}

Mat MetricFamily::metric(double t, const ChartPoint& p) const {
  check_time(t);
  check_point(p);
  return do_metric(t, p);
}

Mat MetricFamily::dt_metric(double t, const ChartPoint& p) const {
  check_time(t);
  check_point(p);
  return do_dt_metric(t, p);
}

Christoffel MetricFamily::christoffel(double t, const ChartPoint& p) const {
  if (!has_closed_form())
    throw UnsupportedError(name() + " has no closed-form Christoffel symbols");
  check_time(t);
  check_point(p);
  return do_christoffel(t, p);
}

CurvatureData MetricFamily::curvature(double t, const ChartPoint& p) const {
  check_time(t);
  check_point(p);
  return do_curvature(t, p);
}

LocalGeometry MetricFamily::local(double t, const ChartPoint& p) const {
  check_time(t);
  check_point(p);
  return do_local(t, p);
}

SdeCoefficients MetricFamily::sde_coefficients(double t, const ChartPoint& p) const {
  check_time(t);
  check_point(p);
  return do_sde_coefficients(t, p);
}

bool MetricFamily::in_domain(const ChartPoint& p) const { return p.finite(); }

ChartPoint MetricFamily::transition(const ChartPoint& p, int target_chart, Mat* jacobian) const {
  if (target_chart != p.chart)
    throw NoOverlapError(name() + " has a single chart");
  if (jacobian) *jacobian = Mat::Identity(dim_, dim_);
  return p;
}

bool MetricFamily::maybe_switch(ChartPoint&, double, Mat*) const { return false; }

double MetricFamily::distance0(const ChartPoint&, const ChartPoint&) const {
  throw UnsupportedError(name() + " has no closed-form distance");
}

Mat MetricFamily::do_dt_metric(double t, const ChartPoint& p) const {
  return dt_metric_fd(*this, t, p);
}

Christoffel MetricFamily::do_christoffel(double, const ChartPoint&) const {
  throw UnsupportedError(name() + " has no closed-form Christoffel symbols");
}

CurvatureData MetricFamily::do_curvature(double t, const ChartPoint& p) const {
  return curvature_fd(*this, t, p);
}

LocalGeometry MetricFamily::do_local(double t, const ChartPoint& p) const {
  LocalGeometry out;
  out.g = do_metric(t, p);
  out.g_inv = out.g.inverse();
  out.sqrt_g_inv = inv_sym_sqrt(out.g);
  out.dt_g = do_dt_metric(t, p);
  out.dt_g_sharp = out.g_inv * out.dt_g;
  out.gamma = has_closed_form() ? do_christoffel(t, p) : christoffel_fd(*this, t, p);
  out.gamma_trace = out.gamma.trace(out.g_inv);
  const CurvatureData curv = do_curvature(t, p);
  out.ricci = curv.ricci;
  out.ricci_sharp = curv.ricci_sharp;
  out.scalar = curv.scalar;
  return out;
}

SdeCoefficients MetricFamily::do_sde_coefficients(double t, const ChartPoint& p) const {
  const Mat g = do_metric(t, p);
  const Christoffel gamma = has_closed_form() ? do_christoffel(t, p) : christoffel_fd(*this, t, p);
  return {inv_sym_sqrt(g), gamma.trace(g.inverse())};
}

// ---------------------------------------------------------------------------

Mat ConformalFamily::do_metric(double t, const ChartPoint& p) const {
  const double w = conformal(t, p).w;
  return std::exp(2.0 * w) * Mat::Identity(dim(), dim());
}

Mat ConformalFamily::do_dt_metric(double t, const ChartPoint& p) const {
  const ConformalData c = conformal(t, p);
  return 2.0 * c.dt_w * std::exp(2.0 * c.w) * Mat::Identity(dim(), dim());
}

namespace {

Christoffel conformal_christoffel(int n, const Vec& dw) {
  Christoffel gamma(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double v = 0.0;
        if (i == k) v += dw[l];
        if (i == l) v += dw[k];
        if (k == l) v -= dw[i];
        gamma(i, k, l) = v;
      }
  return gamma;
}

Mat conformal_ricci(int n, const ConformalData& c) {
  Mat ric = -c.lap * Mat::Identity(n, n);
  if (n != 2) {
    const double m = n - 2.0;
    ric -= m * (c.hess - c.grad * c.grad.transpose());
    ric -= m * c.grad.squaredNorm() * Mat::Identity(n, n);
  }
  return ric;
}

}  // namespace

Christoffel ConformalFamily::do_christoffel(double t, const ChartPoint& p) const {
  return conformal_christoffel(dim(), conformal(t, p).grad);
}

CurvatureData ConformalFamily::do_curvature(double t, const ChartPoint& p) const {
  const ConformalData c = conformal(t, p);
  const int n = dim();
  CurvatureData out;
  out.ricci = conformal_ricci(n, c);
  const double inv = std::exp(-2.0 * c.w);
  out.ricci_sharp = inv * out.ricci;
  out.scalar = out.ricci_sharp.trace();
  Eigen::SelfAdjointEigenSolver<Mat> es(out.ricci_sharp, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  return out;
}

LocalGeometry ConformalFamily::do_local(double t, const ChartPoint& p) const {
  const ConformalData c = conformal(t, p);
  const int n = dim();
  const Mat id = Mat::Identity(n, n);
  const double e2w = std::exp(2.0 * c.w);
  const double inv = 1.0 / e2w;
  LocalGeometry out;
  out.g = e2w * id;
  out.g_inv = inv * id;
  out.sqrt_g_inv = std::exp(-c.w) * id;
  out.dt_g = 2.0 * c.dt_w * e2w * id;
  out.dt_g_sharp = 2.0 * c.dt_w * id;
  out.gamma = conformal_christoffel(n, c.grad);
  out.gamma_trace = inv * (2.0 - n) * c.grad;
  out.ricci = conformal_ricci(n, c);
  out.ricci_sharp = inv * out.ricci;
  out.scalar = out.ricci_sharp.trace();
  return out;
}

SdeCoefficients ConformalFamily::do_sde_coefficients(double t, const ChartPoint& p) const {
  const ConformalData c = conformal(t, p);
  const int n = dim();
  return {std::exp(-c.w) * Mat::Identity(n, n), std::exp(-2.0 * c.w) * (2.0 - n) * c.grad};
}

// ---------------------------------------------------------------------------

EuclideanFamily::EuclideanFamily(int dim) : ConformalFamily(dim, kInfinity, 0.0) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("euclidean dimension must be in [1, 4]");
}

ConformalData EuclideanFamily::conformal(double, const ChartPoint&) const {
  ConformalData c;
  c.grad = Vec::Zero(dim());
  c.hess = Mat::Zero(dim(), dim());
  return c;
}

double EuclideanFamily::distance0(const ChartPoint& a, const ChartPoint& b) const {
  return (a.coords - b.coords).norm();
}

// ---------------------------------------------------------------------------

namespace {
double sphere_lifetime(int dim, double kappa, double radius) {
  if (kappa <= 0.0) return MetricFamily::kInfinity;
  return radius * radius / (kappa * (dim - 1));
}
}  // namespace

SphereFamily::SphereFamily(int dim, double kappa, double radius)
    : ConformalFamily(dim, sphere_lifetime(dim, kappa, radius), kappa), radius_(radius) {
  if (dim < 2 || dim > kMaxDim - 1) throw ConfigError("sphere dimension must be in [2, 3]");
  if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
}

double SphereFamily::scale(double t) const {
  return 1.0 - flow_kappa() * (dim() - 1) * t / (radius_ * radius_);
}

ConformalData SphereFamily::conformal(double t, const ChartPoint& p) const {
  const int n = dim();
  const Vec& x = p.coords;
  const double s = x.squaredNorm();
  const double q = 1.0 + s;
  const double c = scale(t);
  ConformalData out;
  out.w = 0.5 * std::log(4.0 * c * radius_ * radius_) - std::log(q);
  out.grad = (-2.0 / q) * x;
  out.hess = (-2.0 / q) * Mat::Identity(n, n) + (4.0 / (q * q)) * x * x.transpose();
  out.lap = -2.0 * n / q + 4.0 * s / (q * q);
  out.dt_w = 0.5 * (-flow_kappa() * (n - 1) / (radius_ * radius_)) / c;
  return out;
}

bool SphereFamily::in_domain(const ChartPoint& p) const {
  return p.finite() && p.coords.norm() <= kHardLimit;
}

double SphereFamily::boundary_distance(const ChartPoint& p) const {
  return kHardLimit - p.coords.norm();
}

ChartPoint SphereFamily::transition(const ChartPoint& p, int target_chart, Mat* jacobian) const {
  const int n = dim();
  if (target_chart < 0 || target_chart > 1) throw NoOverlapError("sphere has charts 0 and 1");
  if (target_chart == p.chart) {
    if (jacobian) *jacobian = Mat::Identity(n, n);
    return p;
  }
  const double s = p.coords.squaredNorm();
  const double r = std::sqrt(s);
  if (r < 1.0 / kHardLimit || r > kHardLimit)
    throw NoOverlapError("point with |x| = " + std::to_string(r) + " is not in the chart overlap");
  if (jacobian)
    *jacobian = (Mat::Identity(n, n) - (2.0 / s) * p.coords * p.coords.transpose()) / s;
  return ChartPoint(target_chart, p.coords / s);
}

bool SphereFamily::maybe_switch(ChartPoint& p, double threshold, Mat* jacobian) const {
  if (p.coords.norm() <= threshold) return false;
  p = transition(p, 1 - p.chart, jacobian);
  return true;
}

Vec SphereFamily::ambient(const ChartPoint& p) {
  const int n = p.dim();
  const double s = p.coords.squaredNorm();
  Vec q(n + 1);
  q.head(n) = (2.0 / (1.0 + s)) * p.coords;
  q[n] = (1.0 - s) / (1.0 + s);
  if (p.chart == 1) q[n] = -q[n];
  return q;
}

ChartPoint SphereFamily::from_ambient(const Vec& q, int preferred_chart) {
  const int n = static_cast<int>(q.size()) - 1;
  auto project = [&](int chart) {
    const double denom = chart == 0 ? 1.0 + q[n] : 1.0 - q[n];
    return ChartPoint(chart, q.head(n) / denom);
  };
  ChartPoint p = project(preferred_chart);
  if (!p.finite() || p.coords.norm() > 1.5) p = project(1 - preferred_chart);
  return p;
}

double SphereFamily::distance0(const ChartPoint& a, const ChartPoint& b) const {
  const double chord = (ambient(a) - ambient(b)).norm();
  return 2.0 * radius_ * std::asin(std::min(1.0, 0.5 * chord));
}

// ---------------------------------------------------------------------------

namespace {
double hyperbolic_lifetime(int dim, double kappa, double radius) {
  if (kappa >= 0.0) return MetricFamily::kInfinity;
  return radius * radius / (-kappa * (dim - 1));
}
}  // namespace

HyperbolicFamily::HyperbolicFamily(int dim, double kappa, double radius)
    : ConformalFamily(dim, hyperbolic_lifetime(dim, kappa, radius), kappa), radius_(radius) {
  if (dim < 2 || dim > kMaxDim) throw ConfigError("hyperbolic dimension must be in [2, 4]");
  if (!(radius > 0.0)) throw ConfigError("hyperbolic radius must be positive");
}

double HyperbolicFamily::scale(double t) const {
  return 1.0 + flow_kappa() * (dim() - 1) * t / (radius_ * radius_);
}

ConformalData HyperbolicFamily::conformal(double t, const ChartPoint& p) const {
  const int n = dim();
  const Vec& x = p.coords;
  const double s = x.squaredNorm();
  const double q = 1.0 - s;
  const double c = scale(t);
  ConformalData out;
  out.w = 0.5 * std::log(4.0 * c * radius_ * radius_) - std::log(q);
  out.grad = (2.0 / q) * x;
  out.hess = (2.0 / q) * Mat::Identity(n, n) + (4.0 / (q * q)) * x * x.transpose();
  out.lap = 2.0 * n / q + 4.0 * s / (q * q);
  out.dt_w = 0.5 * (flow_kappa() * (n - 1) / (radius_ * radius_)) / c;
  return out;
}

bool HyperbolicFamily::in_domain(const ChartPoint& p) const {
  return p.finite() && p.coords.squaredNorm() < 1.0;
}

double HyperbolicFamily::boundary_distance(const ChartPoint& p) const {
  return 1.0 - p.coords.norm();
}

double HyperbolicFamily::distance0(const ChartPoint& a, const ChartPoint& b) const {
  const double d2 = (a.coords - b.coords).squaredNorm();
  const double den = (1.0 - a.coords.squaredNorm()) * (1.0 - b.coords.squaredNorm());
  return 2.0 * radius_ * std::asinh(std::sqrt(d2 / den));
}

// ---------------------------------------------------------------------------

CigarFamily::CigarFamily(double kappa) : ConformalFamily(2, kInfinity, kappa) {}

ConformalData CigarFamily::conformal(double t, const ChartPoint& p) const {
  const Vec& x = p.coords;
  const double a = std::exp(2.0 * flow_kappa() * t);
  const double s = x.squaredNorm();
  const double q = a + s;
  ConformalData out;
  out.w = -0.5 * std::log(q);
  out.grad = (-1.0 / q) * x;
  out.hess = (-1.0 / q) * Mat::Identity(2, 2) + (2.0 / (q * q)) * x * x.transpose();
  out.lap = -2.0 * a / (q * q);
  out.dt_w = -flow_kappa() * a / q;
  return out;
}

double CigarFamily::distance0(const ChartPoint& a, const ChartPoint& b) const {
  if (a.coords.squaredNorm() == 0.0) return std::asinh(b.coords.norm());
  if (b.coords.squaredNorm() == 0.0) return std::asinh(a.coords.norm());
  throw UnsupportedError("cigar distance is closed-form only from the origin");
}

// ---------------------------------------------------------------------------

ReparametrizedFamily::ReparametrizedFamily(FamilyPtr base, double metric_scale, double time_scale)
    : MetricFamily(base->dim(), base->t_max() * time_scale,
                   base->flow_kappa() * metric_scale / time_scale),
      base_(std::move(base)),
      c_(metric_scale),
      a_(time_scale) {
  if (!(c_ > 0.0) || !(a_ > 0.0)) throw ConfigError("reparametrization scales must be positive");
}

double ReparametrizedFamily::distance0(const ChartPoint& a, const ChartPoint& b) const {
  return std::sqrt(c_) * base_->distance0(a, b);
}

Mat ReparametrizedFamily::do_metric(double t, const ChartPoint& p) const {
  return c_ * base_->metric(t / a_, p);
}

Mat ReparametrizedFamily::do_dt_metric(double t, const ChartPoint& p) const {
  return (c_ / a_) * base_->dt_metric(t / a_, p);
}

Christoffel ReparametrizedFamily::do_christoffel(double t, const ChartPoint& p) const {
  return base_->christoffel(t / a_, p);
}

CurvatureData ReparametrizedFamily::do_curvature(double t, const ChartPoint& p) const {
  CurvatureData out = base_->curvature(t / a_, p);
  out.ricci_sharp /= c_;
  out.scalar /= c_;
  out.eigenvalues /= c_;
  return out;
}

LocalGeometry ReparametrizedFamily::do_local(double t, const ChartPoint& p) const {
  LocalGeometry out = base_->local(t / a_, p);
  out.g *= c_;
  out.g_inv /= c_;
  out.sqrt_g_inv /= std::sqrt(c_);
  out.dt_g *= c_ / a_;
  out.dt_g_sharp /= a_;
  out.gamma_trace /= c_;
  out.ricci_sharp /= c_;
  out.scalar /= c_;
  return out;
}

SdeCoefficients ReparametrizedFamily::do_sde_coefficients(double t, const ChartPoint& p) const {
  SdeCoefficients out = base_->sde_coefficients(t / a_, p);
  out.sqrt_g_inv /= std::sqrt(c_);
  out.gamma_trace /= c_;
  return out;
}

// ---------------------------------------------------------------------------

CustomFamily::CustomFamily(std::string name, int dim, MetricFn fn, double t_max, double kappa,
                           double period, bool is_static)
    : MetricFamily(dim, t_max, kappa),
      name_(std::move(name)),
      fn_(std::move(fn)),
      period_(period),
      static_(is_static) {}

void CustomFamily::normalize(ChartPoint& p) const {
  if (period_ <= 0.0) return;
  for (int i = 0; i < p.dim(); ++i) {
    double v = std::fmod(p.coords[i], period_);
    if (v < 0.0) v += period_;
    if (v >= period_) v = 0.0;
    p.coords[i] = v;
  }
}

Mat CustomFamily::do_metric(double t, const ChartPoint& p) const { return fn_(t, p.coords); }

void wrap_torus(Vec& x) {
  constexpr double period = 2.0 * std::numbers::pi;
  for (int i = 0; i < x.size(); ++i) {
    double v = std::fmod(x[i], period);
    if (v < 0.0) v += period;
    if (v >= period) v = 0.0;
    x[i] = v;
  }
}

// ---------------------------------------------------------------------------

Christoffel christoffel_fd(const MetricFamily& family, double t, const ChartPoint& p, double h_fd) {
  family.check_time(t);
  family.check_point(p);
  const int n = family.dim();
  double h_max = 0.0;
  for (int m = 0; m < n; ++m) h_max = std::max(h_max, fd_step(p.coords[m], h_fd));
  if (family.boundary_distance(p) <= 2.0 * h_max)
    throw BoundaryError("finite-difference stencil too close to the chart boundary");

  std::array<Mat, kMaxDim> dg;
  for (int m = 0; m < n; ++m) {
    const double h = fd_step(p.coords[m], h_fd);
    ChartPoint plus = p;
    ChartPoint minus = p;
    plus.coords[m] += h;
    minus.coords[m] -= h;
    dg[m] = (family.metric(t, plus) - family.metric(t, minus)) / (2.0 * h);
  }
  const Mat g_inv = family.metric(t, p).inverse();
  Christoffel gamma(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        double v = 0.0;
        for (int m = 0; m < n; ++m) v += g_inv(i, m) * (dg[k](m, l) + dg[l](m, k) - dg[m](k, l));
        gamma(i, k, l) = 0.5 * v;
        gamma(i, l, k) = 0.5 * v;
      }
  return gamma;
}

CurvatureData complete_curvature(const Mat& ricci, const Mat& g) {
  CurvatureData out;
  out.ricci = ricci;
  out.ricci_sharp = g.inverse() * ricci;
  out.scalar = out.ricci_sharp.trace();
  out.eigenvalues = g_self_adjoint_eigenvalues(g, ricci);
  return out;
}

CurvatureData curvature_fd(const MetricFamily& family, double t, const ChartPoint& p, double h_fd) {
  const int n = family.dim();
  const Christoffel gamma = christoffel_fd(family, t, p, h_fd);
  // dgamma[a](i, k, l) = d_a Gamma^i_{kl}
  std::array<Christoffel, kMaxDim> dgamma;
  for (int a = 0; a < n; ++a) {
    const double h = fd_step(p.coords[a], h_fd);
    ChartPoint plus = p;
    ChartPoint minus = p;
    plus.coords[a] += h;
    minus.coords[a] -= h;
    const Christoffel gp = christoffel_fd(family, t, plus, h_fd);
    const Christoffel gm = christoffel_fd(family, t, minus, h_fd);
    dgamma[a] = Christoffel(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) dgamma[a](i, k, l) = (gp(i, k, l) - gm(i, k, l)) / (2.0 * h);
  }
  Mat ric = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) {
        v += dgamma[i](i, j, k) - dgamma[k](i, i, j);
        for (int q = 0; q < n; ++q)
          v += gamma(i, i, q) * gamma(q, j, k) - gamma(i, k, q) * gamma(q, i, j);
      }
      ric(j, k) = v;
    }
  ric = 0.5 * (ric + ric.transpose()).eval();
  return complete_curvature(ric, family.metric(t, p));
}

Mat dt_metric_fd(const MetricFamily& family, double t, const ChartPoint& p, double h_t) {
  const double limit = family.time_limit();
  if (t - h_t >= 0.0 && t + h_t <= limit)
    return (family.metric(t + h_t, p) - family.metric(t - h_t, p)) / (2.0 * h_t);
  if (t - h_t < 0.0)
    return (-3.0 * family.metric(t, p) + 4.0 * family.metric(t + h_t, p) -
            family.metric(t + 2.0 * h_t, p)) /
           (2.0 * h_t);
  return (3.0 * family.metric(t, p) - 4.0 * family.metric(t - h_t, p) +
          family.metric(t - 2.0 * h_t, p)) /
         (2.0 * h_t);
}

}  // namespace flowbm
