#include "flowbm/transport.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "flowbm/errors.hpp"
#include "flowbm/linalg.hpp"

namespace flowbm {

Mat TransportTrace::parallel(int k) const { return frame.at(k) * frame.front().inverse(); }

namespace {

double wrap_increment(double d) {
  constexpr double pi = std::numbers::pi;
  d = std::fmod(d + pi, 2.0 * pi);
  if (d < 0.0) d += 2.0 * pi;
  return d - pi;
}

}  // namespace

TransportTrace evolve_transports(const SimConfig& cfg, const PathSample& path,
                                 const TransportOptions& opt) {
  const MetricFamily& fam = *cfg.family;
  const int n = fam.dim();
  const int steps = path.n_steps();
  const double ds = cfg.dt();
  const double dir = cfg.direction == TimeDirection::kForward ? 1.0 : -1.0;
  const double tol = opt.tol_frame >= 0.0 ? opt.tol_frame : 50.0 * ds;
  const double sqrt_sigma = std::sqrt(cfg.sigma);
  if (opt.theta && !opt.reaction_prime) throw ConfigError("theta transport needs a reaction callback");

  std::vector<const ChartEvent*> event_at(steps, nullptr);
  for (const ChartEvent& e : path.chart_events) event_at.at(e.step) = &e;

  const Mat id = Mat::Identity(n, n);
  TransportTrace trace;
  trace.frame.reserve(steps + 1);
  trace.gram_defect.reserve(steps + 1);

  LocalGeometry cur = fam.local(metric_clock(cfg, path.times[0]), path.points[0]);
  Mat u = opt.initial_frame ? *opt.initial_frame : inv_sym_sqrt(cur.g);
  const Mat u0 = u;
  const Mat u0_inv = u0.inverse();
  Mat qd = id, qv = id, qp = id, qt = id;

  auto record = [&](const Mat& frame, double defect) {
    trace.frame.push_back(frame);
    trace.gram_defect.push_back(defect);
    trace.max_gram_defect = std::max(trace.max_gram_defect, defect);
    if (opt.damped) trace.q_damped.push_back(qd);
    if (opt.variation) trace.q_variation.push_back(qv);
    if (opt.phi) trace.q_phi.push_back(qp);
    if (opt.theta) trace.q_theta.push_back(qt);
  };
  auto record_curvature = [&](const Mat& frame) {
    if (!opt.curvature) return;
    Mat rf = frame.inverse() * cur.ricci_sharp * frame;
    trace.ricci_frame.push_back(0.5 * (rf + rf.transpose()));
    trace.scalar.push_back(cur.scalar);
  };
  record(u, gram_defect(u, cur.g));
  record_curvature(u);

  for (int k = 0; k < steps; ++k) {
    try {
      const ChartPoint& x = path.points[k];
      const ChartEvent* event = event_at[k];
      Vec dx = event ? Vec(event->pre_coords - x.coords) : Vec(path.points[k + 1].coords - x.coords);
      if (fam.periodic())
        for (int i = 0; i < n; ++i) dx[i] = wrap_increment(dx[i]);
      const ChartPoint x_end(x.chart, x.coords + dx);
      const double theta_end = metric_clock(cfg, path.times[k + 1]);
      const LocalGeometry end = fam.local(theta_end, x_end);

      auto increment = [&](const LocalGeometry& geo, const Mat& v) -> Mat {
        return -(geo.gamma.along(dx) * v) - (0.5 * dir * ds) * (geo.dt_g_sharp * v);
      };
      const Mat f0 = increment(cur, u);
      const Mat f1 = increment(end, u + f0);
      Mat u_next = u + 0.5 * (f0 + f1);

      const Mat u_inv = u.inverse();
      trace.frame_noise.push_back(u_inv * (sqrt_sigma * (cur.sqrt_g_inv * path.dW[k])));
      if (opt.damped || opt.variation || opt.theta) {
        const Mat a = 0.5 * u_inv * (cfg.sigma * cur.ricci_sharp - dir * cur.dt_g_sharp) * u;
        const Mat a0 = u0 * a * u0_inv;
        if (opt.damped) qd -= ds * (a0 * qd);
        if (opt.variation) qv -= ds * (a0 * qv);
        if (opt.theta) {
          const double fp = opt.reaction_prime(metric_clock(cfg, path.times[k]), x);
          qt -= ds * ((a0 - fp * id) * qt);
        }
      }
      if (opt.phi) qp *= 1.0 + (2.0 * cur.scalar - 1.5 * opt.r_avg) * ds;

      if (event) {
        u_next = event->jacobian * u_next;
        cur = fam.local(theta_end, path.points[k + 1]);
      } else {
        cur = end;
      }
      const double defect = gram_defect(u_next, cur.g);
      if (opt.check_gram && !(defect <= tol))
        throw FrameDriftError("Gram defect " + std::to_string(defect) + " exceeds tolerance " +
                              std::to_string(tol));
      u = u_next;
      record(u, defect);
      record_curvature(u);
    } catch (const PathError&) {
      throw;
    } catch (const Error& e) {
      throw PathError(k, e.what());
    }
  }
  return trace;
}

TransportTrace evolve_frame(const SimConfig& cfg, const PathSample& path) {
  return evolve_transports(cfg, path, {});
}

TransportTrace evolve_damped(const SimConfig& cfg, const PathSample& path) {
  TransportOptions opt;
  opt.damped = true;
  return evolve_transports(cfg, path, opt);
}

TransportTrace evolve_variation(const SimConfig& cfg, const PathSample& path) {
  TransportOptions opt;
  opt.variation = true;
  return evolve_transports(cfg, path, opt);
}

TransportTrace evolve_phi(const SimConfig& cfg, const PathSample& path, double r_avg) {
  TransportOptions opt;
  opt.phi = true;
  opt.curvature = true;
  opt.r_avg = r_avg;
  return evolve_transports(cfg, path, opt);
}

TransportTrace evolve_theta(const SimConfig& cfg, const PathSample& path,
                            ReactionFn reaction_prime) {
  TransportOptions opt;
  opt.theta = true;
  opt.reaction_prime = std::move(reaction_prime);
  return evolve_transports(cfg, path, opt);
}

EquivalenceGap equivalence_gap(const SimConfig& cfg, const PathSample& path,
                               const TransportTrace& trace) {
  if (trace.q_damped.empty() || trace.q_variation.empty())
    throw ConfigError("equivalence gap needs damped and variation transports");
  const int last = trace.n_steps();
  const int n = cfg.family->dim();
  const Mat id = Mat::Identity(n, n);
  EquivalenceGap gap;
  gap.gap_w = max_abs(trace.q_damped[last] - id);
  gap.gap_tx = max_abs(trace.q_variation[last] - id);
  const Mat h_end = cfg.family->metric(metric_clock(cfg, path.times[last]), path.points[last]);
  const Mat w = trace.damped(last) * trace.frame.front();
  gap.isometry_defect_w = max_abs(w.transpose() * h_end * w - id);
  gap.max_gram_defect = trace.max_gram_defect;
  return gap;
}

void write_transport_csv(std::ostream& out, const TransportTrace& trace) {
  const int n = static_cast<int>(trace.frame.front().rows());
  const bool with_w = !trace.q_damped.empty();
  out << "step,gram_defect";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out << ",U" << i + 1 << j + 1;
  if (with_w)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << ",W" << i + 1 << j + 1;
  out << '\n';
  out.precision(17);
  for (int k = 0; k <= trace.n_steps(); ++k) {
    out << k << ',' << trace.gram_defect[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << ',' << trace.frame[k](i, j);
    if (with_w) {
      const Mat w = trace.damped(k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out << ',' << w(i, j);
    }
    out << '\n';
  }
}

}  // namespace flowbm
