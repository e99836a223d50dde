#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "flowbm/geometry.hpp"
#include "flowbm/sde.hpp"

namespace flowbm {

/// Reaction derivative F'(f(t, x)) along the path, given metric time and point.
using ReactionFn = std::function<double(double metric_t, const ChartPoint& p)>;

struct TransportOptions {
  bool damped = false;
  bool variation = false;
  bool phi = false;
  bool theta = false;
  /// Record frame-basis Ricci operators and scalar curvature per step.
  bool curvature = false;
  /// Average scalar curvature r entering the phi equation (0 on the torus).
  double r_avg = 0.0;
  ReactionFn reaction_prime;
  /// Gram tolerance; negative means 50 * dt.
  double tol_frame = -1.0;
  bool check_gram = true;
  /// Initial frame; defaults to g(metric_clock(0), x0)^{-1/2}.
  std::optional<Mat> initial_frame;
};

/// Per-step transport data along one path. The damped, variation, phi and
/// theta transports are stored in conjugated form Q = par^{-1} (.), acting on
/// the tangent space at the start point.
struct TransportTrace {
  std::vector<Mat> frame;  ///< U_k, columns g(metric_t_k)-orthonormal
  std::vector<double> gram_defect;
  double max_gram_defect = 0.0;
  /// Frame-basis Brownian increments U_k^{-1} sqrt(sigma) g_k^{-1/2} dB_k.
  std::vector<Vec> frame_noise;
  std::vector<Mat> q_damped;
  std::vector<Mat> q_variation;
  std::vector<Mat> q_phi;
  std::vector<Mat> q_theta;
  /// U_k^{-1} Ric^# U_k, symmetric in an orthonormal frame.
  std::vector<Mat> ricci_frame;
  std::vector<double> scalar;

  int n_steps() const { return static_cast<int>(frame.size()) - 1; }
  /// par_{0,k} = U_k U_0^{-1}.
  Mat parallel(int k) const;
  Mat damped(int k) const { return parallel(k) * q_damped.at(k); }
  Mat variation(int k) const { return parallel(k) * q_variation.at(k); }
  Mat phi(int k) const { return parallel(k) * q_phi.at(k); }
  Mat theta(int k) const { return parallel(k) * q_theta.at(k); }
};

/// Integrates the moving-metric parallel transport (Heun on the Stratonovich
/// connection term plus the vertical drift -1/2 (dh/ds)^#) and, on request,
/// the damped, variation and reaction transports with Euler steps on their
/// conjugated forms. Chart switches act on the frame through the logged
/// Jacobians. Throws FrameDriftError when the Gram defect exceeds tol_frame.
TransportTrace evolve_transports(const SimConfig& cfg, const PathSample& path,
                                 const TransportOptions& options = {});

TransportTrace evolve_frame(const SimConfig& cfg, const PathSample& path);
TransportTrace evolve_damped(const SimConfig& cfg, const PathSample& path);
TransportTrace evolve_variation(const SimConfig& cfg, const PathSample& path);
TransportTrace evolve_phi(const SimConfig& cfg, const PathSample& path, double r_avg = 0.0);
TransportTrace evolve_theta(const SimConfig& cfg, const PathSample& path, ReactionFn reaction_prime);

struct EquivalenceGap {
  double gap_w = 0.0;   ///< max |par^{-1} W - I| at the final step
  double gap_tx = 0.0;  ///< max |par^{-1} TX - I| at the final step
  /// max |W^T h(T) W - h(0)| with h the metric along the clock.
  double isometry_defect_w = 0.0;
  double max_gram_defect = 0.0;
};

EquivalenceGap equivalence_gap(const SimConfig& cfg, const PathSample& path,
                               const TransportTrace& trace);

/// step, gram_defect and the entries of U and (if present) W per step.
void write_transport_csv(std::ostream& out, const TransportTrace& trace);

}  // namespace flowbm
