#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flowbm/flow_solver.hpp"
#include "flowbm/geometry.hpp"
#include "flowbm/spectral.hpp"

namespace flowbm {

/// Smooth function on R^{n+1} restricted to the unit sphere, with its
/// Euclidean gradient and Hessian.
class AmbientFunction {
 public:
  enum class Kind { kConstant, kLinear, kProduct, kExp };

  static AmbientFunction constant(double c);
  /// P_i (a degree-1 harmonic).
  static AmbientFunction linear(int i);
  /// P_i P_j, i != j (a degree-2 harmonic).
  static AmbientFunction product(int i, int j);
  /// exp(P_i); not a finite harmonic sum.
  static AmbientFunction exp(int i);

  Kind kind() const { return kind_; }
  /// Harmonic degree, or -1 when the function is not a single harmonic.
  int degree() const;
  double sup_norm() const;

  double value(const Vec& q) const;
  Vec gradient(const Vec& q) const;
  Mat hessian(const Vec& q) const;
  /// Laplace-Beltrami operator of the unit round sphere applied to the restriction.
  double sphere_laplacian(const Vec& q) const;

 private:
  AmbientFunction(Kind kind, int i, int j, double c) : kind_(kind), i_(i), j_(j), c_(c) {}
  Kind kind_;
  int i_;
  int j_;
  double c_;
};

/// d(ambient point) / d(chart coordinates), an (n+1) x n matrix.
Mat stereographic_jacobian(const ChartPoint& p);

/// f(t, .) solving dt f = (sigma/2) Lap_{g(t)} f.
class HeatSolution {
 public:
  virtual ~HeatSolution() = default;
  virtual const MetricFamily& family() const = 0;
  virtual double value(double t, const ChartPoint& p) const = 0;
  /// Chart differential (d_i f).
  virtual Vec differential(double t, const ChartPoint& p) const = 0;
  /// g(t)-gradient, g(t)^{-1} df.
  Vec gradient(double t, const ChartPoint& p) const;
};

/// Closed-form heat flow on the evolving round sphere: each degree-l harmonic
/// decays by exp(-(sigma/2) l(l+n-1) tau(t) / rho^2), where
/// tau(t) = int_0^t ds / c(s) is the time change of the family.
class SphereHeatSolution final : public HeatSolution {
 public:
  SphereHeatSolution(std::shared_ptr<const SphereFamily> family,
                     std::vector<AmbientFunction> terms, double sigma = 1.0);

  const MetricFamily& family() const override { return *family_; }
  /// int_0^t ds / c(s).
  double tau(double t) const;
  double decay(int degree, double t) const;
  double value(double t, const ChartPoint& p) const override;
  Vec differential(double t, const ChartPoint& p) const override;
  /// Lap_{g(t)} f(t, .) through the ambient formula.
  double laplacian(double t, const ChartPoint& p) const;

 private:
  std::shared_ptr<const SphereFamily> family_;
  std::vector<AmbientFunction> terms_;
  double sigma_;
};

/// Laplace-Beltrami operator of g(t) applied to a fixed ambient function.
double sphere_laplacian_at(const SphereFamily& family, const AmbientFunction& f, double t,
                           const ChartPoint& p);

/// Spectral-in-space, RK4-in-time heat solution on a conformal torus family.
class TorusHeatSolution final : public HeatSolution {
 public:
  TorusHeatSolution(std::shared_ptr<const TorusNrfFamily> family, std::vector<double> times,
                    std::vector<Field2D> frames, double sigma);

  const MetricFamily& family() const override { return *family_; }
  double value(double t, const ChartPoint& p) const override;
  Vec differential(double t, const ChartPoint& p) const override;
  /// dt f - (sigma/2) Lap_t f at (t, p).
  double residual(double t, const ChartPoint& p) const;
  const std::vector<double>& times() const { return times_; }
  const std::vector<Field2D>& frames() const { return frames_; }

 private:
  std::shared_ptr<const TorusNrfFamily> family_;
  std::vector<double> times_;
  std::vector<Field2D> frames_;
  SpectralSeries series_;
  double sigma_;
};

struct TorusSolveOptions {
  double dt = 1e-3;
  double sigma = 1.0;
  /// Spacing of stored frames (multiple of dt).
  double sample_interval = 0.01;
};

/// dt f = (sigma/2) exp(-u) Lap_0 f from f0 on [0, T]. Throws InstabilityError
/// when dt breaks the RK4 stability interval.
std::shared_ptr<TorusHeatSolution> heat_solve_torus(std::shared_ptr<const TorusNrfFamily> family,
                                                    const Field2D& f0, double T,
                                                    const TorusSolveOptions& options = {});

/// Density of the g(t)-Brownian motion against mu_t on the torus grid.
struct DensityField {
  int grid_n = 0;
  std::vector<double> times;
  std::vector<Field2D> values;   ///< h(t, .)
  std::vector<Field2D> weights;  ///< exp(u(t, .)), the volume density of mu_t
  double mollifier_width = 0.0;
  /// Minimum of h before clipping and the number of clipped values below -1e-8.
  double min_value = 0.0;
  std::size_t clipped = 0;

  /// sum h * weights * cell area at stored time k.
  double mass(std::size_t k) const;
  /// Probability mass of each grid cell at stored time k, using exact cell
  /// averages of the trigonometric interpolant of h * weights.
  Field2D cell_probabilities(std::size_t k) const;
};

/// Periodic Gaussian of width `width` centred at x0, as a Lebesgue density
/// normalised to unit discrete mass.
Field2D periodic_gaussian(int grid_n, const Vec& x0, double width);

/// Mollifier width actually used for a requested width on an n-grid.
double mollifier_width(int grid_n, double requested);

/// Solves dt h + h tr(1/2 g^{-1} dt g) = (sigma/2) Lap_t h from a mollified delta
/// at x0. The equation is advanced in the conservative variable h exp(u).
DensityField conjugate_solve_torus(std::shared_ptr<const TorusNrfFamily> family, const Vec& x0,
                                   double T, double requested_width,
                                   const TorusSolveOptions& options = {});

/// Flat-torus heat kernel from the same Gaussian start: wrapped Gaussian with
/// variance width^2 + sigma t, evaluated on the grid.
Field2D flat_torus_theta_density(int grid_n, const Vec& x0, double width, double sigma, double t);

void save_density_field(const std::string& path, const DensityField& field);
DensityField load_density_field(const std::string& path);

}  // namespace flowbm
