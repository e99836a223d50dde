#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "flowbm/flow_solver.hpp"
#include "flowbm/pde_oracle.hpp"
#include "flowbm/sde.hpp"
#include "flowbm/transport.hpp"

namespace flowbm {

/// Long-format plot data: one row per entry, one column per named quantity.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct EstimatorReport {
  std::string estimator;
  std::vector<double> estimate;
  std::vector<double> std_error;
  std::size_t n_paths = 0;
  std::map<std::string, double> diagnostics;
  /// Everything needed to reproduce the run (seed, dt, kappa, sigma, ...).
  std::map<std::string, std::string> config_echo;
  /// Named threshold checks; the report passes when all of them do.
  std::map<std::string, bool> checks;
  std::vector<std::string> warnings;
  std::map<std::string, Table> tables;
  /// Per-path terminal statistics.
  std::map<std::string, std::vector<double>> per_path;

  bool passed() const;
};

/// {estimator, config_echo, estimate, std_error, n_paths, diagnostics, checks, warnings, passed}.
std::string to_json(const EstimatorReport& report, int indent = 2);
/// Adds the simulation settings to config_echo.
void echo_config(EstimatorReport& report, const SimConfig& cfg);

struct McOptions {
  std::size_t n_paths = 10000;
  int threads = 1;
};

using PointFn = std::function<double(const ChartPoint& p)>;
/// Function of simulation time s and position.
using PathFn = std::function<double(double s, const ChartPoint& p)>;
/// Time profile kdot(s) of the Bismut weight; must integrate to 1 over [0, T].
using KdotFn = std::function<double(double s)>;

/// Evenly spaced step indices 0 = k_0 < ... < k_count = n_steps.
std::vector<int> checkpoint_steps(int n_steps, int count);

// ---------------------------------------------------------------------------
// Bismut formula and gradient bounds

/// Per-path vectors f0(X_T) xi with xi_i = sum_k kdot(s_k) <U_0^{-1} Q_k e_i, dB_k> / sigma,
/// where Q_k is the conjugated damped transport and dB_k the frame-basis
/// increments. Their mean is the chart differential df(T, .)_x. The
/// configuration must use the reversed clock.
std::vector<Vec> bismut_samples(const SimConfig& cfg, const PointFn& f0, const ChartPoint& x,
                                const McOptions& mc, const KdotFn& kdot = {});

/// df(T, .)_x v with its standard error. diagnostics hold the full differential.
EstimatorReport bismut_gradient(const SimConfig& cfg, const PointFn& f0, const ChartPoint& x,
                                const Vec& v, const McOptions& mc, const KdotFn& kdot = {});

/// g(T)-norm of the Bismut gradient at each point for each horizon in `times`
/// (time step kept at cfg.dt()); compares sup estimates with f_sup / sqrt(T)
/// and checks that they decrease in T within `z` standard errors.
EstimatorReport gradient_bound_check(const SimConfig& cfg, const PointFn& f0, double f_sup,
                                     const std::vector<ChartPoint>& points,
                                     const std::vector<double>& times, const McOptions& mc,
                                     double z = 3.0);

// ---------------------------------------------------------------------------
// Martingale hypothesis tests

/// samples[path][j] is the process at checkpoint j (j = 0 the start). Tests
/// E[M_j - M_0] = 0 by mean / std_error at each checkpoint j >= 1.
EstimatorReport martingale_drift_test(const std::vector<std::vector<double>>& samples,
                                      const std::vector<double>& checkpoint_times,
                                      double threshold = 3.0);

/// f(X_t) - f(X_0) - int_0^t drift(s, X_s) ds at the checkpoints, with the
/// integral by the trapezoid rule. With drift = (sigma/2) Lap_{metric_clock(s)} f
/// this is the defining martingale of the g(t)-Brownian motion.
std::vector<std::vector<double>> compensated_samples(const SimConfig& cfg, const ChartPoint& x0,
                                                     const PathFn& f, const PathFn& drift,
                                                     const std::vector<int>& checkpoints,
                                                     const McOptions& mc);

/// df(T - s, X_s)(W_s v) at the checkpoints for a heat solution on the
/// reversed clock.
std::vector<std::vector<double>> damped_martingale_samples(const SimConfig& cfg,
                                                           const HeatSolution& heat,
                                                           const ChartPoint& x0, const Vec& v,
                                                           const std::vector<int>& checkpoints,
                                                           const McOptions& mc);

/// dR(T - s, X_s)(phi_s v) at the checkpoints on the torus flow (reversed clock).
std::vector<std::vector<double>> phi_martingale_samples(const SimConfig& cfg,
                                                        const TorusNrfFamily& family,
                                                        const ChartPoint& x0, const Vec& v,
                                                        const std::vector<int>& checkpoints,
                                                        const McOptions& mc);

// ---------------------------------------------------------------------------
// Laws and time changes

/// Deterministic clock int_0^t ds / c(s) of the sphere and hyperbolic families.
double closed_form_tau(const MetricFamily& family, double t);

/// Path-dependent cigar reference: runs a g(0)-Brownian motion B from x0 with
/// step dtau, integrates dt/dtau = (1 + |B|^2) / (exp(2 kappa t) + |B|^2) by the
/// trapezoid rule and returns B at the tau where t reaches T (linear
/// interpolation in tau). Noise comes from NoiseStream(seed, path).
ChartPoint cigar_reference_endpoint(const CigarFamily& family, const ChartPoint& x0, double T,
                                    double dtau, std::uint64_t seed, std::uint64_t path);

/// KS comparison of the g(0)-distance from x0 of X_T under g(t) and of the
/// time-changed g(0)-Brownian motion. cfg.family must be a sphere,
/// hyperbolic or cigar family; the reference uses seed cfg.seed + 1.
EstimatorReport time_change_law_test(const SimConfig& cfg, const ChartPoint& x0,
                                     const McOptions& mc, double p_threshold = 0.01);

/// KS test of the scaling identity, wrapping scaling_check.
EstimatorReport scaling_law_test(const SimConfig& cfg, double c, const ChartPoint& x0,
                                 const McOptions& mc, double p_threshold = 0.01);

/// E[f0(X_T)] against an exact value.
EstimatorReport expectation_check(const SimConfig& cfg, const ChartPoint& x0, const PointFn& f0,
                                  double exact, const McOptions& mc, double z = 3.0);

/// expectation_check repeated for each time step; table "convergence" has one row per dt.
EstimatorReport weak_convergence(const SimConfig& cfg, const ChartPoint& x0, const PointFn& f0,
                                 double exact, const std::vector<double>& dts, const McOptions& mc);

// ---------------------------------------------------------------------------
// Transport checks

/// Max and median Gram defect of the frame over paths.
EstimatorReport frame_isometry_check(const SimConfig& cfg, const ChartPoint& x0,
                                     const McOptions& mc, double tol_frame = -1.0);

/// Final-step gaps of W and TX from parallel transport and the isometry defect
/// of W, averaged and maximized over paths.
EstimatorReport equivalence_check(const SimConfig& cfg, const ChartPoint& x0, const McOptions& mc,
                                  double gap_threshold = 5e-2);

// ---------------------------------------------------------------------------
// Intrinsic martingale

struct IntrinsicMartingale {
  std::vector<double> times;
  /// L_k in the g-orthonormal basis U_0 of the initial tangent space.
  std::vector<Vec> L;
  std::vector<double> realized_qv;
  /// sigma int_0^t tr((Ric^#)^2)(metric_clock(s), X_s) ds along the path.
  std::vector<double> predicted_qv;
};

/// dL_k = (U_k^{-1} Ric^# U_k) dB_k with Ric^# at the path's metric time, so L
/// is the pure stochastic integral of the transported Ricci operator.
IntrinsicMartingale intrinsic_martingale(const SimConfig& cfg, const PathSample& path,
                                         const TransportTrace& trace);

/// Mean realized [L, L]_T against the mean predicted one, E[L_T] = 0 test and
/// the "qv_curve" table (t, realized_qv, predicted_qv).
EstimatorReport intrinsic_martingale_check(const SimConfig& cfg, const ChartPoint& x0,
                                           const McOptions& mc, double rel_tol = 0.05,
                                           int curve_points = 20);

// ---------------------------------------------------------------------------
// Torus flow estimators

struct ConjugateHeatOptions {
  double requested_width = 0.0;
  double pde_dt = 1e-3;
  double l1_threshold = 0.05;
  double mass_tol = 1e-6;
};

/// Expected L1 distance sum_c E|K_c / N - p_c| between an N-sample histogram
/// and its own cell probabilities, K_c ~ Bin(N, p_c) (exact binomial mean
/// absolute deviation). The floor the L1 check can reach with exact sampling.
double expected_sampling_l1(const std::vector<double>& probabilities, std::size_t n_paths);

/// Histogram of X_T started from the mollified delta at x0 (the start point
/// is drawn from the same Gaussian as the PDE initial datum) against the
/// conjugate heat solve. The L1 distance is the sum over cells of
/// |MC mass - PDE mass|, i.e. int |h_MC - h| d mu_T.
EstimatorReport conjugate_heat_consistency(const SimConfig& cfg,
                                           std::shared_ptr<const TorusNrfFamily> family,
                                           const Vec& x0, const McOptions& mc,
                                           const ConjugateHeatOptions& opt = {});

/// Per path ||phi_T v||^2_{g(0)} against ||v||^2_{g(T)} exp(int_0^T 4R ds) (r = 0),
/// and log ||phi_T||-type consistency log q_T - int 2R ds. Reversed clock, sigma = 2.
EstimatorReport phi_norm_identity_check(const SimConfig& cfg, const TorusNrfFamily& family,
                                        const ChartPoint& x0, const Vec& v, const McOptions& mc,
                                        double rel_tol = 0.01);

/// ||grad R(T, x)||_T <= sup ||grad R(0)||_0 E[exp(int_0^T 2R(T - s, X_s) ds)] at each
/// point; reports both sides and the smallest slack.
EstimatorReport scalar_gradient_estimate_check(const SimConfig& cfg, const TorusNrfFamily& family,
                                               const std::vector<ChartPoint>& points,
                                               const McOptions& mc);

/// sup over a refined grid of ||grad R(t)||_t.
double sup_scalar_gradient(const TorusNrfFamily& family, double t, int refine = 4);

// ---------------------------------------------------------------------------
// Solver and oracle checks

/// Curvature-equation residual, volume drift and max |r| of a flow solve.
EstimatorReport nrf_solve_report(const TorusFlowSolution& sol, double residual_tol = 1e-3,
                                 double volume_tol = 1e-6, double r_tol = 1e-8);

/// Deterministic self-consistency suite of the heat and conjugate heat oracles:
/// closed-form torus and sphere solutions, theta-function kernel, mass
/// conservation, the Tr term on a kappa = 1 torus flow, collocation residuals
/// and heat / conjugate-heat duality.
EstimatorReport oracle_selftest();

}  // namespace flowbm
