#include "flowbm/sde.hpp"

#include <cmath>
#include <memory>
#include <ostream>

#include "flowbm/errors.hpp"
#include "flowbm/parallel.hpp"

namespace flowbm {

void validate(const SimConfig& cfg) {
  if (!cfg.family) throw ConfigError("simulation has no metric family");
  if (cfg.n_steps < 10) throw ConfigError("n_steps must be at least 10");
  if (!(cfg.sigma > 0.0)) throw ConfigError("speed sigma must be positive");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ConfigError("horizon T must be positive");
  if (!(cfg.switch_threshold > 1.0)) throw ConfigError("chart switch threshold must exceed 1");
  cfg.family->check_time(cfg.T);
}

double metric_clock(const SimConfig& cfg, double s) {
  return cfg.direction == TimeDirection::kForward ? s : cfg.T - s;
}

ChartPoint em_step(const SimConfig& cfg, double s, const ChartPoint& p, const Vec& dW, double dt,
                   ChartEvent* event) {
  const MetricFamily& fam = *cfg.family;
  const SdeCoefficients c = fam.sde_coefficients(metric_clock(cfg, s), p);
  ChartPoint next(p.chart, p.coords + std::sqrt(cfg.sigma) * (c.sqrt_g_inv * dW) -
                               (0.5 * cfg.sigma * dt) * c.gamma_trace);
  fam.normalize(next);
  if (!fam.in_domain(next)) throw DomainError("step left the chart validity region");
  if (event) {
    Mat jac;
    const Vec before = next.coords;
    const int from = next.chart;
    if (fam.maybe_switch(next, cfg.switch_threshold, &jac)) {
      event->from = from;
      event->to = next.chart;
      event->jacobian = jac;
      event->pre_coords = before;
    } else {
      event->from = event->to = next.chart;
    }
  } else {
    fam.maybe_switch(next, cfg.switch_threshold, nullptr);
  }
  return next;
}

namespace {

template <typename OnStep>
ChartPoint run_path(const SimConfig& cfg, const ChartPoint& x0, std::uint64_t path_index,
                    OnStep&& on_step) {
  const NoiseStream noise(cfg.seed, path_index);
  const int n = cfg.family->dim();
  const double dt = cfg.dt();
  ChartPoint p = x0;
  cfg.family->normalize(p);
  cfg.family->check_point(p);
  Vec dW(n);
  for (int k = 0; k < cfg.n_steps; ++k) {
    noise.normals(static_cast<std::uint32_t>(k), n, dW.data());
    dW *= std::sqrt(dt);
    ChartEvent event;
    try {
      ChartPoint next = em_step(cfg, cfg.time_at(k), p, dW, dt, &event);
      on_step(k, dW, next, event);
      p = std::move(next);
    } catch (const PathError&) {
      throw;
    } catch (const Error& e) {
      throw PathError(k, e.what());
    }
  }
  return p;
}

}  // namespace

PathSample simulate_path(const SimConfig& cfg, const ChartPoint& x0, std::uint64_t path_index) {
  validate(cfg);
  PathSample path;
  path.path_index = path_index;
  path.times.reserve(cfg.n_steps + 1);
  path.points.reserve(cfg.n_steps + 1);
  path.dW.reserve(cfg.n_steps);
  path.times.push_back(0.0);
  ChartPoint start = x0;
  cfg.family->normalize(start);
  path.points.push_back(start);
  run_path(cfg, x0, path_index,
           [&](int k, const Vec& dW, const ChartPoint& next, const ChartEvent& event) {
             path.dW.push_back(dW);
             path.times.push_back(cfg.time_at(k + 1));
             path.points.push_back(next);
             if (event.from != event.to) {
               ChartEvent logged = event;
               logged.step = k;
               path.chart_events.push_back(std::move(logged));
             }
           });
  return path;
}

ChartPoint simulate_endpoint(const SimConfig& cfg, const ChartPoint& x0, std::uint64_t path_index) {
  validate(cfg);
  return run_path(cfg, x0, path_index, [](int, const Vec&, const ChartPoint&, const ChartEvent&) {});
}

std::vector<ChartPoint> simulate_endpoints(const SimConfig& cfg, const ChartPoint& x0,
                                           std::size_t n_paths, int threads) {
  validate(cfg);
  std::vector<ChartPoint> out(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t i) { out[i] = simulate_endpoint(cfg, x0, i); });
  return out;
}

void write_path_csv(std::ostream& out, const SimConfig& cfg, const PathSample& path) {
  const int n = cfg.family->dim();
  out << "step,s,metric_t,chart";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= n; ++i) out << ",dW" << i;
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    const double s = path.times[k];
    out << k << ',' << s << ',' << metric_clock(cfg, s) << ',' << path.points[k].chart;
    for (int i = 0; i < n; ++i) out << ',' << path.points[k].coords[i];
    for (int i = 0; i < n; ++i) out << ',' << (k < path.dW.size() ? path.dW[k][i] : 0.0);
    out << '\n';
  }
}

ScalingReport scaling_check(const SimConfig& cfg, double c, const ChartPoint& x0,
                            std::size_t n_paths, int threads) {
  if (!(c > 0.0)) throw ConfigError("scaling factor must be positive");
  validate(cfg);
  SimConfig scaled = cfg;
  scaled.family = std::make_shared<ReparametrizedFamily>(cfg.family, c, c);
  scaled.T = c * cfg.T;
  scaled.family->check_time(scaled.T);
  const MetricFamily& base = *cfg.family;

  ScalingReport report;
  report.c = c;
  report.base_sample.resize(n_paths);
  report.scaled_sample.resize(n_paths);
  SimConfig scaled_independent = scaled;
  scaled_independent.seed = cfg.seed ^ 0x9E3779B97F4A7C15ull;
  parallel_for(n_paths, threads, [&](std::size_t i) {
    report.base_sample[i] = base.distance0(x0, simulate_endpoint(cfg, x0, i));
    report.scaled_sample[i] = base.distance0(x0, simulate_endpoint(scaled_independent, x0, i));
  });
  report.ks = ks_two_sample(report.base_sample, report.scaled_sample);

  const std::size_t n_same = std::min<std::size_t>(n_paths, 64);
  for (std::size_t i = 0; i < n_same; ++i) {
    const double d = base.distance0(x0, simulate_endpoint(scaled, x0, i));
    report.same_seed_max_diff = std::max(report.same_seed_max_diff,
                                         std::abs(d - report.base_sample[i]));
  }
  return report;
}

}  // namespace flowbm
