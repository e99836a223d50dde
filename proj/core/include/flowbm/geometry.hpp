#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "flowbm/types.hpp"

namespace flowbm {

/// Everything the stepping and transport loops need at one (t, p).
struct LocalGeometry {
  Mat g;
  Mat g_inv;
  Mat sqrt_g_inv;
  Mat dt_g;
  Mat dt_g_sharp;  ///< g^{-1} dt g
  Christoffel gamma;
  Vec gamma_trace;  ///< g^{kl} Gamma^i_{kl}
  Mat ricci;
  Mat ricci_sharp;
  double scalar = 0.0;
};

/// Diffusion coefficient and Ito drift ingredients of the coordinate SDE.
struct SdeCoefficients {
  Mat sqrt_g_inv;
  Vec gamma_trace;
};

/// Time-dependent Riemannian metric expressed in an atlas of charts.
///
/// Public evaluators validate (t, p) and then dispatch to the protected
/// hooks. Implementations are immutable after construction and safe to share
/// between threads.
class MetricFamily {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  MetricFamily(int dim, double t_max, double kappa) : dim_(dim), t_max_(t_max), kappa_(kappa) {}
  virtual ~MetricFamily() = default;

  virtual std::string name() const = 0;
  int dim() const { return dim_; }
  double t_max() const { return t_max_; }
  /// kappa in dt g = -kappa Ric for Ricci-flow families, 0 otherwise.
  double flow_kappa() const { return kappa_; }
  bool finite_lifetime() const { return t_max_ < kInfinity && !data_backed(); }
  /// Latest admissible metric time.
  double time_limit() const;

  virtual int chart_count() const { return 1; }
  virtual bool has_closed_form() const { return true; }
  virtual bool periodic() const { return false; }
  /// True when the family is only defined on a stored time window [0, t_max].
  virtual bool data_backed() const { return false; }
  virtual bool is_static() const { return false; }

  void check_time(double t) const;
  void check_point(const ChartPoint& p) const;

  Mat metric(double t, const ChartPoint& p) const;
  Mat dt_metric(double t, const ChartPoint& p) const;
  /// Closed-form Christoffels; UnsupportedError for numeric-only families.
  Christoffel christoffel(double t, const ChartPoint& p) const;
  CurvatureData curvature(double t, const ChartPoint& p) const;
  LocalGeometry local(double t, const ChartPoint& p) const;
  SdeCoefficients sde_coefficients(double t, const ChartPoint& p) const;

  /// Distance from p to the chart boundary (infinite when there is none).
  virtual double boundary_distance(const ChartPoint&) const { return kInfinity; }

  /// Moves p to `target_chart`, writing the transition Jacobian d(new)/d(old).
  virtual ChartPoint transition(const ChartPoint& p, int target_chart, Mat* jacobian) const;
  /// Switches chart when the trigger radius is exceeded; returns true on a switch.
  virtual bool maybe_switch(ChartPoint& p, double threshold, Mat* jacobian) const;
  /// Brings periodic coordinates back to the fundamental domain.
  virtual void normalize(ChartPoint&) const {}

  /// g(0)-geodesic distance between two points.
  virtual double distance0(const ChartPoint& a, const ChartPoint& b) const;

  /// Coordinates lie inside the validity region of their chart.
  virtual bool in_domain(const ChartPoint& p) const;

 protected:
  virtual Mat do_metric(double t, const ChartPoint& p) const = 0;
  virtual Mat do_dt_metric(double t, const ChartPoint& p) const;
  virtual Christoffel do_christoffel(double t, const ChartPoint& p) const;
  virtual CurvatureData do_curvature(double t, const ChartPoint& p) const;
  virtual LocalGeometry do_local(double t, const ChartPoint& p) const;
  virtual SdeCoefficients do_sde_coefficients(double t, const ChartPoint& p) const;

 private:
  int dim_;
  double t_max_;
  double kappa_;
};

using FamilyPtr = std::shared_ptr<const MetricFamily>;

/// Log-conformal factor data for g = exp(2w) delta.
struct ConformalData {
  double w = 0.0;
  Vec grad;
  Mat hess;          ///< only required when dim != 2
  double lap = 0.0;  ///< flat Laplacian of w
  double dt_w = 0.0;
};

/// Families conformal to the flat metric in every chart.
class ConformalFamily : public MetricFamily {
 public:
  using MetricFamily::MetricFamily;

  virtual ConformalData conformal(double t, const ChartPoint& p) const = 0;

 protected:
  Mat do_metric(double t, const ChartPoint& p) const override;
  Mat do_dt_metric(double t, const ChartPoint& p) const override;
  Christoffel do_christoffel(double t, const ChartPoint& p) const override;
  CurvatureData do_curvature(double t, const ChartPoint& p) const override;
  LocalGeometry do_local(double t, const ChartPoint& p) const override;
  SdeCoefficients do_sde_coefficients(double t, const ChartPoint& p) const override;
};

class EuclideanFamily final : public ConformalFamily {
 public:
  explicit EuclideanFamily(int dim);
  std::string name() const override { return "euclidean"; }
  bool is_static() const override { return true; }
  ConformalData conformal(double t, const ChartPoint& p) const override;
  double distance0(const ChartPoint& a, const ChartPoint& b) const override;
};

/// Round sphere of radius rho evolving by dt g = -kappa Ric:
/// g(t) = (1 - kappa (n-1) t / rho^2) rho^2 sigma, sigma = 4 |dx|^2 / (1 + |x|^2)^2,
/// in two stereographic charts related by x -> x / |x|^2.
class SphereFamily final : public ConformalFamily {
 public:
  SphereFamily(int dim, double kappa, double radius = 1.0);
  std::string name() const override { return "sphere"; }
  int chart_count() const override { return 2; }
  bool is_static() const override { return flow_kappa() == 0.0; }
  double radius() const { return radius_; }
  /// Conformal scale c(t) with g(t) = c(t) g(0).
  double scale(double t) const;
  ConformalData conformal(double t, const ChartPoint& p) const override;
  double boundary_distance(const ChartPoint& p) const override;
  ChartPoint transition(const ChartPoint& p, int target_chart, Mat* jacobian) const override;
  bool maybe_switch(ChartPoint& p, double threshold, Mat* jacobian) const override;
  double distance0(const ChartPoint& a, const ChartPoint& b) const override;
  bool in_domain(const ChartPoint& p) const override;

  /// Point of the unit sphere in R^{n+1}.
  static Vec ambient(const ChartPoint& p);
  static ChartPoint from_ambient(const Vec& q, int preferred_chart);

  static constexpr double kHardLimit = 10.0;

 private:
  double radius_;
};

/// Hyperbolic space in the Poincare ball, g(t) = (1 + kappa (n-1) t / rho^2) rho^2 h.
class HyperbolicFamily final : public ConformalFamily {
 public:
  HyperbolicFamily(int dim, double kappa, double radius = 1.0);
  std::string name() const override { return "hyperbolic"; }
  bool is_static() const override { return flow_kappa() == 0.0; }
  double radius() const { return radius_; }
  double scale(double t) const;
  ConformalData conformal(double t, const ChartPoint& p) const override;
  double boundary_distance(const ChartPoint& p) const override;
  double distance0(const ChartPoint& a, const ChartPoint& b) const override;
  bool in_domain(const ChartPoint& p) const override;

 private:
  double radius_;
};

/// Hamilton's cigar, g(t) = |dx|^2 / (exp(2 kappa t) + |x|^2) on R^2.
class CigarFamily final : public ConformalFamily {
 public:
  explicit CigarFamily(double kappa = 2.0);
  std::string name() const override { return "cigar"; }
  ConformalData conformal(double t, const ChartPoint& p) const override;
  /// Only distances from the origin have a closed form.
  double distance0(const ChartPoint& a, const ChartPoint& b) const override;
};

/// c g(t / a) for a base family g. Rescales kappa to kappa c / a.
class ReparametrizedFamily final : public MetricFamily {
 public:
  ReparametrizedFamily(FamilyPtr base, double metric_scale, double time_scale);
  std::string name() const override { return base_->name() + "_reparametrized"; }
  int chart_count() const override { return base_->chart_count(); }
  bool has_closed_form() const override { return base_->has_closed_form(); }
  bool periodic() const override { return base_->periodic(); }
  bool data_backed() const override { return base_->data_backed(); }
  bool is_static() const override { return base_->is_static(); }
  double boundary_distance(const ChartPoint& p) const override {
    return base_->boundary_distance(p);
  }
  ChartPoint transition(const ChartPoint& p, int target_chart, Mat* jacobian) const override {
    return base_->transition(p, target_chart, jacobian);
  }
  bool maybe_switch(ChartPoint& p, double threshold, Mat* jacobian) const override {
    return base_->maybe_switch(p, threshold, jacobian);
  }
  void normalize(ChartPoint& p) const override { base_->normalize(p); }
  double distance0(const ChartPoint& a, const ChartPoint& b) const override;
  bool in_domain(const ChartPoint& p) const override { return base_->in_domain(p); }
  const MetricFamily& base() const { return *base_; }

 protected:
  Mat do_metric(double t, const ChartPoint& p) const override;
  Mat do_dt_metric(double t, const ChartPoint& p) const override;
  Christoffel do_christoffel(double t, const ChartPoint& p) const override;
  CurvatureData do_curvature(double t, const ChartPoint& p) const override;
  LocalGeometry do_local(double t, const ChartPoint& p) const override;
  SdeCoefficients do_sde_coefficients(double t, const ChartPoint& p) const override;

 private:
  FamilyPtr base_;
  double c_;
  double a_;
};

/// Metric given only as a callback; every derivative is a finite difference.
class CustomFamily final : public MetricFamily {
 public:
  using MetricFn = std::function<Mat(double t, const Vec& x)>;
  CustomFamily(std::string name, int dim, MetricFn fn, double t_max = kInfinity,
               double kappa = 0.0, double period = 0.0, bool is_static = false);
  std::string name() const override { return name_; }
  bool has_closed_form() const override { return false; }
  bool periodic() const override { return period_ > 0.0; }
  bool is_static() const override { return static_; }
  void normalize(ChartPoint& p) const override;

 protected:
  Mat do_metric(double t, const ChartPoint& p) const override;

 private:
  std::string name_;
  MetricFn fn_;
  double period_;
  bool static_;
};

/// Wraps periodic coordinates into [0, 2 pi).
void wrap_torus(Vec& x);

/// Default central-difference step for coordinate value c.
inline double fd_step(double c, double base = 1e-4) { return base * std::max(1.0, std::abs(c)); }

/// Central-difference Christoffels from metric evaluations.
Christoffel christoffel_fd(const MetricFamily& family, double t, const ChartPoint& p,
                           double h_fd = 1e-4);
/// Ricci data from central differences of christoffel_fd.
CurvatureData curvature_fd(const MetricFamily& family, double t, const ChartPoint& p,
                           double h_fd = 1e-4);
/// Central difference in time of the metric.
Mat dt_metric_fd(const MetricFamily& family, double t, const ChartPoint& p, double h_t = 1e-5);

/// Fills ricci_sharp, scalar and eigenvalues from ricci and g.
CurvatureData complete_curvature(const Mat& ricci, const Mat& g);

}  // namespace flowbm
