#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowbm/geometry.hpp"
#include "flowbm/rng.hpp"
#include "flowbm/stats.hpp"

namespace flowbm {

/// Simulation setup for g(t)-Brownian motion with generator (sigma/2) Lap_t.
struct SimConfig {
  FamilyPtr family;
  double T = 1.0;
  int n_steps = 100;
  double sigma = 1.0;
  TimeDirection direction = TimeDirection::kForward;
  std::uint64_t seed = 0;
  /// Chart-switch trigger radius (sphere atlas).
  double switch_threshold = 1.5;

  double dt() const { return T / n_steps; }
  /// Simulation time of step k, computed without accumulation.
  double time_at(int k) const { return k == n_steps ? T : T * k / n_steps; }
};

/// Throws ConfigError / TimeRangeError when the configuration is unusable.
void validate(const SimConfig& cfg);

/// Metric time seen at simulation time s: s (forward) or T - s (reversed).
double metric_clock(const SimConfig& cfg, double s);

/// Chart switch logged during a path.
struct ChartEvent {
  int step = 0;  ///< the switch happened at the end of this step
  int from = 0;
  int to = 0;
  Mat jacobian;  ///< d(new coords) / d(old coords) at the switch point
  Vec pre_coords;
};

/// One discretized path. points[k] is the position at times[k]; dW[k] is the
/// increment used for the step from k to k + 1.
struct PathSample {
  std::vector<double> times;
  std::vector<ChartPoint> points;
  std::vector<Vec> dW;
  std::vector<ChartEvent> chart_events;
  std::uint64_t path_index = 0;
  int n_steps() const { return static_cast<int>(dW.size()); }
};

/// One Euler-Maruyama step from simulation time s:
/// x += sqrt(sigma) g^{-1/2} dW - (sigma/2) g^{kl} Gamma_{kl} dt, coefficients at
/// metric_clock(s). A chart switch is applied afterwards and reported in `event`.
ChartPoint em_step(const SimConfig& cfg, double s, const ChartPoint& p, const Vec& dW, double dt,
                   ChartEvent* event = nullptr);

/// Full replayable path driven by NoiseStream(cfg.seed, path_index).
/// Step failures are rethrown as PathError carrying the step index.
PathSample simulate_path(const SimConfig& cfg, const ChartPoint& x0, std::uint64_t path_index);

/// Terminal point only; same noise as simulate_path.
ChartPoint simulate_endpoint(const SimConfig& cfg, const ChartPoint& x0, std::uint64_t path_index);

/// Terminal points of paths 0..n_paths-1, in index order.
std::vector<ChartPoint> simulate_endpoints(const SimConfig& cfg, const ChartPoint& x0,
                                           std::size_t n_paths, int threads = 1);

/// Writes step, s, metric_t, chart, x1..xn, dW1..dWn.
void write_path_csv(std::ostream& out, const SimConfig& cfg, const PathSample& path);

struct ScalingReport {
  double c = 1.0;
  KsResult ks;
  /// Max |difference| of the statistic between the two runs driven by the same
  /// seeds (pathwise, not in law).
  double same_seed_max_diff = 0.0;
  std::vector<double> base_sample;
  std::vector<double> scaled_sample;
};

/// Compares the law of the g(0)-distance from x0 at time T under g with the one
/// at time cT under c g(t/c). The scaled run uses an independent seed.
ScalingReport scaling_check(const SimConfig& cfg, double c, const ChartPoint& x0,
                            std::size_t n_paths, int threads = 1);

}  // namespace flowbm
