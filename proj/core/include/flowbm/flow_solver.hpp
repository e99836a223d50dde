#pragma once

#include <string>
#include <vector>

#include "flowbm/geometry.hpp"
#include "flowbm/spectral.hpp"

namespace flowbm {

/// Normalized Ricci flow g = exp(u) delta on the flat 2-torus [0, 2pi)^2,
/// sampled at increasing times.
struct TorusFlowSolution {
  int grid_n = 0;
  std::vector<double> times;
  std::vector<Field2D> u;
  std::vector<Field2D> R;
  /// Largest |r| (volume-averaged curvature) seen over all RK4 stages.
  double max_abs_r = 0.0;
  /// Total volume sum(exp(u)) * cell area at each sample.
  std::vector<double> volumes;
};

struct NrfOptions {
  double t_end = 1.0;
  double dt = 1e-3;
  /// Spacing of stored samples; must be a multiple of dt.
  double sample_interval = 0.01;
  /// Instability guard: max|u| may not exceed this factor times its initial value.
  double growth_limit = 10.0;
};

/// Largest dt accepted for u on an n x n grid: the 0.2 h^2 min(exp u) bound,
/// tightened where the spectral RK4 stability interval is smaller.
double nrf_max_dt(const Field2D& u);

/// R = -exp(-u) Lap_0 u, computed spectrally.
Field2D scalar_curvature_field(const Fft2D& fft, const Field2D& u);

/// Integrates du/dt = r - R with explicit RK4 and spectral derivatives.
/// Throws ResolutionError for grid_n < 8, InstabilityError when the time step
/// breaks the stability bound or max|u| blows up.
TorusFlowSolution solve_nrf(const Field2D& u0, const NrfOptions& options);

/// Single-mode initial condition amplitude * cos(k1 x1 + k2 x2).
Field2D cosine_field(int grid_n, double amplitude, int k1 = 1, int k2 = 0);

/// Largest |dt R - exp(-u) Lap_0 R - R (R - r)| over grid nodes and interior
/// samples, with dt R by central differences between stored samples. Checks
/// the curvature equation independently of the u-equation that produced it.
double curvature_equation_residual(const TorusFlowSolution& sol);

/// max_k |V_k / V_0 - 1| over the stored volumes.
double volume_drift(const TorusFlowSolution& sol);

void save_flow_snapshot(const std::string& path, const TorusFlowSolution& sol);
TorusFlowSolution load_flow_snapshot(const std::string& path);

/// The conformal metric exp(u(t)) delta as a MetricFamily on the periodic
/// chart. Space is spectral, time is cubic Lagrange between stored samples.
/// With r = 0, dt g = -R g = -2 Ric, so flow_kappa() is 2.
class TorusNrfFamily final : public ConformalFamily {
 public:
  explicit TorusNrfFamily(TorusFlowSolution sol);

  std::string name() const override { return "torus_nrf"; }
  bool periodic() const override { return true; }
  bool data_backed() const override { return true; }
  bool is_static() const override { return static_; }
  void normalize(ChartPoint& p) const override;
  ConformalData conformal(double t, const ChartPoint& p) const override;
  /// Flat-torus distance; only available when u is identically zero.
  double distance0(const ChartPoint& a, const ChartPoint& b) const override;

  const TorusFlowSolution& solution() const { return sol_; }
  /// Scalar curvature R and its flat derivatives at (t, p).
  FieldEval scalar_field(double t, const ChartPoint& p) const;
  /// g(t)-gradient of R, exp(-u) grad_0 R.
  Vec scalar_gradient(double t, const ChartPoint& p) const;
  /// u(t) and du/dt on the grid, interpolated in time.
  Field2D grid_u(double t) const;
  Field2D grid_dt_u(double t) const;
  bool flat() const { return flat_; }

 private:
  TorusFlowSolution sol_;
  SpectralSeries u_series_;
  SpectralSeries r_series_;
  bool static_ = false;
  bool flat_ = false;
};

/// g(t)-gradient of R for a stored solution at (t, p).
Vec scalar_curvature_gradient(const TorusFlowSolution& sol, double t, const ChartPoint& p);

}  // namespace flowbm
