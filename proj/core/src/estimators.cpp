#include "flowbm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "flowbm/errors.hpp"
#include "flowbm/family_factory.hpp"
#include "flowbm/linalg.hpp"
#include "flowbm/parallel.hpp"
#include "flowbm/rng.hpp"
#include "flowbm/stats.hpp"

namespace flowbm {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + mid));
}

std::vector<double> component(const std::vector<Vec>& xs, int i) {
  std::vector<double> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) out[k] = xs[k][i];
  return out;
}

void require_reversed(const SimConfig& cfg, const char* what) {
  if (cfg.direction != TimeDirection::kReversed)
    throw ConfigError(std::string(what) + " needs the reversed clock");
}

/// Mean and covariance of per-path vectors, with order-independent sums.
void vector_stats(const std::vector<Vec>& xs, Vec& mean, Mat& cov) {
  const int n = static_cast<int>(xs.front().size());
  const double count = static_cast<double>(xs.size());
  mean = Vec(n);
  for (int i = 0; i < n; ++i) mean[i] = pairwise_sum(component(xs, i)) / count;
  cov = Mat::Zero(n, n);
  std::vector<double> prod(xs.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      for (std::size_t k = 0; k < xs.size(); ++k)
        prod[k] = (xs[k][i] - mean[i]) * (xs[k][j] - mean[j]);
      cov(i, j) = cov(j, i) = pairwise_sum(prod) / std::max(1.0, count - 1.0);
    }
}

double normalized(double mean, double se) {
  if (se > 0.0) return std::abs(mean) / se;
  return mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

bool EstimatorReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

std::string to_json(const EstimatorReport& r, int indent) {
  nlohmann::ordered_json j;
  j["estimator"] = r.estimator;
  j["config_echo"] = r.config_echo;
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  j["n_paths"] = r.n_paths;
  j["diagnostics"] = r.diagnostics;
  j["checks"] = r.checks;
  j["warnings"] = r.warnings;
  j["passed"] = r.passed();
  return j.dump(indent);
}

void echo_config(EstimatorReport& r, const SimConfig& cfg) {
  auto& e = r.config_echo;
  if (cfg.family) {
    e["family"] = cfg.family->name();
    e["dim"] = std::to_string(cfg.family->dim());
    e["kappa"] = num(cfg.family->flow_kappa());
  }
  e["T"] = num(cfg.T);
  e["n_steps"] = std::to_string(cfg.n_steps);
  e["dt"] = num(cfg.dt());
  e["sigma"] = num(cfg.sigma);
  e["direction"] = cfg.direction == TimeDirection::kForward ? "forward" : "reversed";
  e["seed"] = std::to_string(cfg.seed);
  e["switch_threshold"] = num(cfg.switch_threshold);
}

std::vector<int> checkpoint_steps(int n_steps, int count) {
  if (count < 1) throw ConfigError("need at least one checkpoint");
  std::vector<int> out{0};
  for (int j = 1; j <= count; ++j) {
    const int k = static_cast<int>(std::lround(static_cast<double>(n_steps) * j / count));
    if (k > out.back()) out.push_back(k);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Vec> bismut_samples(const SimConfig& cfg, const PointFn& f0, const ChartPoint& x,
                                const McOptions& mc, const KdotFn& kdot) {
  validate(cfg);
  require_reversed(cfg, "the Bismut estimator");
  const int n = cfg.family->dim();
  std::vector<Vec> out(mc.n_paths);
  TransportOptions opt;
  opt.damped = true;
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x, i);
    const TransportTrace tr = evolve_transports(cfg, path, opt);
    const Mat u0_inv = tr.frame.front().inverse();
    Vec xi = Vec::Zero(n);
    for (int k = 0; k < path.n_steps(); ++k) {
      const double w = kdot ? kdot(path.times[k]) : 1.0 / cfg.T;
      xi += w * ((u0_inv * tr.q_damped[k]).transpose() * tr.frame_noise[k]);
    }
    out[i] = (f0(path.points.back()) / cfg.sigma) * xi;
  });
  return out;
}

EstimatorReport bismut_gradient(const SimConfig& cfg, const PointFn& f0, const ChartPoint& x,
                                const Vec& v, const McOptions& mc, const KdotFn& kdot) {
  const std::vector<Vec> samples = bismut_samples(cfg, f0, x, mc, kdot);
  EstimatorReport r;
  r.estimator = "bismut_gradient";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  std::vector<double> dv(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) dv[k] = samples[k].dot(v);
  const MeanStats s = mean_stats(dv);
  r.estimate = {s.mean};
  r.std_error = {s.std_error};
  for (int i = 0; i < x.dim(); ++i) {
    const MeanStats c = mean_stats(component(samples, i));
    r.diagnostics["df_" + std::to_string(i + 1)] = c.mean;
    r.diagnostics["df_" + std::to_string(i + 1) + "_std_error"] = c.std_error;
  }
  r.per_path["df_v"] = std::move(dv);
  return r;
}

EstimatorReport gradient_bound_check(const SimConfig& cfg, const PointFn& f0, double f_sup,
                                     const std::vector<ChartPoint>& points,
                                     const std::vector<double>& times, const McOptions& mc,
                                     double z) {
  if (points.empty() || times.empty()) throw ConfigError("gradient bound check needs points and times");
  EstimatorReport r;
  r.estimator = "gradient_bound";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  const double dt = cfg.dt();
  Table table{{"T", "point", "grad_norm", "std_error", "bound"}, {}};
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    SimConfig c = cfg;
    c.T = times[ti];
    c.n_steps = std::max(10, static_cast<int>(std::lround(c.T / dt)));
    double sup = -1.0;
    double sup_se = 0.0;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      Vec mean;
      Mat cov;
      vector_stats(bismut_samples(c, f0, points[pi], mc, {}), mean, cov);
      const Mat g_inv = cfg.family->metric(c.T, points[pi]).inverse();
      const double norm = std::sqrt(std::max(0.0, mean.dot(g_inv * mean)));
      double se = 0.0;
      if (norm > 0.0) {
        const Vec a = g_inv * mean / norm;
        se = std::sqrt(std::max(0.0, a.dot(cov * a)) / static_cast<double>(mc.n_paths));
      } else {
        se = std::sqrt(cov.trace() / static_cast<double>(mc.n_paths));
      }
      table.rows.push_back({c.T, static_cast<double>(pi), norm, se, f_sup / std::sqrt(c.T)});
      if (norm > sup) {
        sup = norm;
        sup_se = se;
      }
    }
    const double bound = f_sup / std::sqrt(c.T);
    const std::string tag = "T=" + num(c.T);
    r.estimate.push_back(sup);
    r.std_error.push_back(sup_se);
    r.diagnostics["bound_" + tag] = bound;
    r.diagnostics["slack_" + tag] = bound - sup;
    r.checks["bound_" + tag] = sup <= bound + z * sup_se;
    if (ti > 0) {
      const double prev = r.estimate[ti - 1];
      const double se = std::hypot(r.std_error[ti - 1], sup_se);
      r.checks["decreasing_" + tag] = times[ti] <= times[ti - 1] || sup <= prev + z * se;
    }
  }
  r.tables["gradient_norms"] = std::move(table);
  return r;
}

// ---------------------------------------------------------------------------

EstimatorReport martingale_drift_test(const std::vector<std::vector<double>>& samples,
                                      const std::vector<double>& checkpoint_times,
                                      double threshold) {
  if (samples.empty()) throw ConfigError("martingale drift test needs samples");
  const std::size_t m = checkpoint_times.size();
  EstimatorReport r;
  r.estimator = "martingale_drift";
  r.n_paths = samples.size();
  double worst = 0.0;
  bool degenerate = false;
  Table table{{"t", "mean_increment", "std_error", "normalized"}, {}};
  std::vector<double> inc(samples.size());
  for (std::size_t j = 1; j < m; ++j) {
    double scale = 0.0;
    for (std::size_t p = 0; p < samples.size(); ++p) {
      inc[p] = samples[p].at(j) - samples[p][0];
      scale = std::max(scale, std::abs(samples[p][j]));
    }
    const MeanStats s = mean_stats(inc);
    double z = 0.0;
    if (s.std_error <= 1e-14 * std::max(1.0, scale)) {
      degenerate = true;
      z = std::abs(s.mean) <= 1e-12 * std::max(1.0, scale) ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      z = normalized(s.mean, s.std_error);
    }
    worst = std::max(worst, z);
    r.estimate.push_back(s.mean);
    r.std_error.push_back(s.std_error);
    table.rows.push_back({checkpoint_times[j], s.mean, s.std_error, z});
  }
  r.diagnostics["max_normalized_residual"] = worst;
  r.diagnostics["threshold"] = threshold;
  r.diagnostics["degenerate"] = degenerate ? 1.0 : 0.0;
  if (degenerate) r.warnings.push_back("process variance is numerically zero at some checkpoint");
  r.checks["drift"] = worst <= threshold;
  r.tables["drift"] = std::move(table);
  return r;
}

std::vector<std::vector<double>> compensated_samples(const SimConfig& cfg, const ChartPoint& x0,
                                                     const PathFn& f, const PathFn& drift,
                                                     const std::vector<int>& checkpoints,
                                                     const McOptions& mc) {
  validate(cfg);
  std::vector<std::vector<double>> out(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x0, i);
    std::vector<double> row;
    row.reserve(checkpoints.size());
    const double f_start = f(0.0, path.points[0]);
    double integral = 0.0;
    double prev = drift(0.0, path.points[0]);
    std::size_t next = 0;
    for (int k = 0; k <= path.n_steps(); ++k) {
      if (k > 0) {
        const double cur = drift(path.times[k], path.points[k]);
        integral += 0.5 * (path.times[k] - path.times[k - 1]) * (prev + cur);
        prev = cur;
      }
      while (next < checkpoints.size() && checkpoints[next] == k) {
        row.push_back(f(path.times[k], path.points[k]) - f_start - integral);
        ++next;
      }
    }
    out[i] = std::move(row);
  });
  return out;
}

std::vector<std::vector<double>> damped_martingale_samples(const SimConfig& cfg,
                                                           const HeatSolution& heat,
                                                           const ChartPoint& x0, const Vec& v,
                                                           const std::vector<int>& checkpoints,
                                                           const McOptions& mc) {
  validate(cfg);
  require_reversed(cfg, "the damped martingale");
  TransportOptions opt;
  opt.damped = true;
  std::vector<std::vector<double>> out(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x0, i);
    const TransportTrace tr = evolve_transports(cfg, path, opt);
    std::vector<double> row;
    for (int k : checkpoints) {
      const double t = metric_clock(cfg, path.times.at(k));
      row.push_back(heat.differential(t, path.points[k]).dot(tr.damped(k) * v));
    }
    out[i] = std::move(row);
  });
  return out;
}

std::vector<std::vector<double>> phi_martingale_samples(const SimConfig& cfg,
                                                        const TorusNrfFamily& family,
                                                        const ChartPoint& x0, const Vec& v,
                                                        const std::vector<int>& checkpoints,
                                                        const McOptions& mc) {
  validate(cfg);
  require_reversed(cfg, "the phi martingale");
  TransportOptions opt;
  opt.phi = true;
  std::vector<std::vector<double>> out(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x0, i);
    const TransportTrace tr = evolve_transports(cfg, path, opt);
    std::vector<double> row;
    for (int k : checkpoints) {
      const FieldEval e = family.scalar_field(metric_clock(cfg, path.times.at(k)), path.points[k]);
      Vec dr(2);
      dr << e.d1, e.d2;
      row.push_back(dr.dot(tr.phi(k) * v));
    }
    out[i] = std::move(row);
  });
  return out;
}

// ---------------------------------------------------------------------------

double closed_form_tau(const MetricFamily& family, double t) {
  double c = 1.0;
  if (const auto* s = dynamic_cast<const SphereFamily*>(&family)) {
    family.check_time(t);
    c = s->scale(t);
  } else if (const auto* h = dynamic_cast<const HyperbolicFamily*>(&family)) {
    family.check_time(t);
    c = h->scale(t);
  } else {
    throw UnsupportedError("no closed-form time change for family " + family.name());
  }
  if (t == 0.0 || c == 1.0) return t;
  // c(s) is linear in s, so int_0^t ds / c(s) = t ln c(t) / (c(t) - 1).
  return t * std::log(c) / (c - 1.0);
}

ChartPoint cigar_reference_endpoint(const CigarFamily& family, const ChartPoint& x0, double T,
                                    double dtau, std::uint64_t seed, std::uint64_t path) {
  if (!(dtau > 0.0) || !(T >= 0.0)) throw ConfigError("cigar reference needs dtau > 0 and T >= 0");
  SimConfig ref;
  ref.family = std::make_shared<CigarFamily>(0.0);
  ref.T = 1.0;
  ref.n_steps = 10;
  const double two_kappa = 2.0 * family.flow_kappa();
  auto rate = [&](const ChartPoint& b, double t) {
    const double s = b.coords.squaredNorm();
    return (1.0 + s) / (std::exp(two_kappa * t) + s);
  };
  if (T == 0.0) return x0;
  const NoiseStream noise(seed, path);
  const double tau_cap = 10.0 * (std::exp(std::abs(two_kappa) * T) + 1.0) * T + 10.0;
  const long max_steps = static_cast<long>(tau_cap / dtau) + 10;
  ChartPoint b = x0;
  double t = 0.0;
  Vec dW(2);
  for (long k = 0; k < max_steps; ++k) {
    noise.normals(static_cast<std::uint32_t>(k), 2, dW.data());
    dW *= std::sqrt(dtau);
    ChartPoint next;
    try {
      next = em_step(ref, k * dtau, b, dW, dtau);
    } catch (const Error& e) {
      throw PathError(static_cast<int>(k), e.what());
    }
    const double r0 = rate(b, t);
    const double r1 = rate(next, t + dtau * r0);
    const double t_next = t + 0.5 * dtau * (r0 + r1);
    if (t_next >= T) {
      const double frac = (T - t) / (t_next - t);
      return ChartPoint(0, b.coords + frac * (next.coords - b.coords));
    }
    b = next;
    t = t_next;
  }
  throw ConfigError("cigar reference clock did not reach T");
}

namespace {

Table ks_cdf_table(const std::vector<double>& a, const std::vector<double>& b) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : a) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : b) lo = std::min(lo, v), hi = std::max(hi, v);
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[i] = lo + (hi - lo) * i / 100.0;
  const std::vector<double> ca = ecdf(a, grid);
  const std::vector<double> cb = ecdf(b, grid);
  Table t{{"value", "cdf_a", "cdf_b"}, {}};
  for (int i = 0; i <= 100; ++i) t.rows.push_back({grid[i], ca[i], cb[i]});
  return t;
}

}  // namespace

EstimatorReport time_change_law_test(const SimConfig& cfg, const ChartPoint& x0,
                                     const McOptions& mc, double p_threshold) {
  validate(cfg);
  if (cfg.direction != TimeDirection::kForward) throw ConfigError("time-change test uses the forward clock");
  const MetricFamily& fam = *cfg.family;
  EstimatorReport r;
  r.estimator = "time_change_law";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  r.config_echo["reference_seed"] = std::to_string(cfg.seed + 1);

  std::vector<double> flow(mc.n_paths);
  std::vector<double> ref(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    flow[i] = fam.distance0(x0, simulate_endpoint(cfg, x0, i));
  });

  if (const auto* cigar = dynamic_cast<const CigarFamily*>(&fam)) {
    r.diagnostics["tau"] = std::numeric_limits<double>::quiet_NaN();
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
      ref[i] = fam.distance0(x0, cigar_reference_endpoint(*cigar, x0, cfg.T, cfg.dt(), cfg.seed + 1, i));
    });
  } else {
    FamilyPtr still;
    if (const auto* s = dynamic_cast<const SphereFamily*>(&fam))
      still = std::make_shared<SphereFamily>(s->dim(), 0.0, s->radius());
    else if (const auto* h = dynamic_cast<const HyperbolicFamily*>(&fam))
      still = std::make_shared<HyperbolicFamily>(h->dim(), 0.0, h->radius());
    else
      throw UnsupportedError("time-change law test needs a sphere, hyperbolic or cigar family");
    const double tau = closed_form_tau(fam, cfg.T);
    r.diagnostics["tau"] = tau;
    SimConfig rc = cfg;
    rc.family = still;
    rc.T = tau;
    rc.n_steps = std::max(10, static_cast<int>(std::lround(tau / cfg.dt())));
    rc.seed = cfg.seed + 1;
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
      ref[i] = still->distance0(x0, simulate_endpoint(rc, x0, i));
    });
  }
  const KsResult ks = ks_two_sample(flow, ref);
  r.estimate = {ks.statistic};
  r.std_error = {std::sqrt(0.5 * (1.0 / ks.n1 + 1.0 / ks.n2))};
  r.diagnostics["ks_statistic"] = ks.statistic;
  r.diagnostics["p_value"] = ks.p_value;
  r.diagnostics["mean_distance_flow"] = mean_stats(flow).mean;
  r.diagnostics["mean_distance_reference"] = mean_stats(ref).mean;
  r.checks["ks_p_value"] = ks.p_value > p_threshold;
  r.tables["ks_cdf"] = ks_cdf_table(flow, ref);
  r.per_path["distance_flow"] = std::move(flow);
  r.per_path["distance_reference"] = std::move(ref);
  return r;
}

EstimatorReport scaling_law_test(const SimConfig& cfg, double c, const ChartPoint& x0,
                                 const McOptions& mc, double p_threshold) {
  ScalingReport s = scaling_check(cfg, c, x0, mc.n_paths, mc.threads);
  EstimatorReport r;
  r.estimator = "scaling_law";
  echo_config(r, cfg);
  r.config_echo["scale"] = num(c);
  r.n_paths = mc.n_paths;
  r.estimate = {s.ks.statistic};
  r.std_error = {std::sqrt(0.5 * (1.0 / s.ks.n1 + 1.0 / s.ks.n2))};
  r.diagnostics["ks_statistic"] = s.ks.statistic;
  r.diagnostics["p_value"] = s.ks.p_value;
  r.diagnostics["same_seed_max_diff"] = s.same_seed_max_diff;
  r.checks["ks_p_value"] = s.ks.p_value > p_threshold;
  r.tables["ks_cdf"] = ks_cdf_table(s.base_sample, s.scaled_sample);
  r.per_path["distance_base"] = std::move(s.base_sample);
  r.per_path["distance_scaled"] = std::move(s.scaled_sample);
  return r;
}

EstimatorReport expectation_check(const SimConfig& cfg, const ChartPoint& x0, const PointFn& f0,
                                  double exact, const McOptions& mc, double z) {
  const std::vector<ChartPoint> ends = simulate_endpoints(cfg, x0, mc.n_paths, mc.threads);
  std::vector<double> vals(ends.size());
  for (std::size_t i = 0; i < ends.size(); ++i) vals[i] = f0(ends[i]);
  const MeanStats s = mean_stats(vals);
  EstimatorReport r;
  r.estimator = "expectation";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  r.estimate = {s.mean};
  r.std_error = {s.std_error};
  r.diagnostics["exact"] = exact;
  r.diagnostics["error"] = s.mean - exact;
  r.diagnostics["normalized_error"] = normalized(s.mean - exact, s.std_error);
  r.checks["within_std_errors"] = std::abs(s.mean - exact) <= z * s.std_error;
  r.per_path["f0_XT"] = std::move(vals);
  return r;
}

EstimatorReport weak_convergence(const SimConfig& cfg, const ChartPoint& x0, const PointFn& f0,
                                 double exact, const std::vector<double>& dts, const McOptions& mc) {
  EstimatorReport r;
  r.estimator = "weak_convergence";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  Table table{{"dt", "mean", "std_error", "error"}, {}};
  std::vector<double> lx, ly;
  for (double dt : dts) {
    SimConfig c = cfg;
    c.n_steps = std::max(10, static_cast<int>(std::lround(cfg.T / dt)));
    const EstimatorReport e = expectation_check(c, x0, f0, exact, mc);
    const double err = e.estimate[0] - exact;
    table.rows.push_back({c.dt(), e.estimate[0], e.std_error[0], err});
    r.estimate.push_back(err);
    r.std_error.push_back(e.std_error[0]);
    if (err != 0.0) {
      lx.push_back(std::log(c.dt()));
      ly.push_back(std::log(std::abs(err)));
    }
  }
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    r.diagnostics["log_log_slope"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  r.tables["convergence"] = std::move(table);
  return r;
}

// ---------------------------------------------------------------------------

EstimatorReport frame_isometry_check(const SimConfig& cfg, const ChartPoint& x0,
                                     const McOptions& mc, double tol_frame) {
  validate(cfg);
  const double tol = tol_frame >= 0.0 ? tol_frame : 50.0 * cfg.dt();
  TransportOptions opt;
  opt.check_gram = false;
  std::vector<double> defects(mc.n_paths);
  std::vector<double> switches(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x0, i);
    defects[i] = evolve_transports(cfg, path, opt).max_gram_defect;
    switches[i] = static_cast<double>(path.chart_events.size());
  });
  EstimatorReport r;
  r.estimator = "frame_isometry";
  echo_config(r, cfg);
  r.config_echo["tol_frame"] = num(tol);
  r.n_paths = mc.n_paths;
  const double worst = *std::max_element(defects.begin(), defects.end());
  const double med = median(defects);
  r.estimate = {worst, med};
  r.std_error = {0.0, 0.0};
  r.diagnostics["max_gram_defect"] = worst;
  r.diagnostics["median_gram_defect"] = med;
  r.diagnostics["chart_switches"] = pairwise_sum(switches);
  r.checks["gram_defect"] = worst <= tol;
  r.per_path["max_gram_defect"] = std::move(defects);
  return r;
}

EstimatorReport equivalence_check(const SimConfig& cfg, const ChartPoint& x0, const McOptions& mc,
                                  double gap_threshold) {
  validate(cfg);
  TransportOptions opt;
  opt.damped = true;
  opt.variation = true;
  std::vector<double> gw(mc.n_paths), gt(mc.n_paths), iso(mc.n_paths), gram(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x0, i);
    const TransportTrace tr = evolve_transports(cfg, path, opt);
    const EquivalenceGap g = equivalence_gap(cfg, path, tr);
    gw[i] = g.gap_w;
    gt[i] = g.gap_tx;
    iso[i] = g.isometry_defect_w;
    gram[i] = g.max_gram_defect;
  });
  EstimatorReport r;
  r.estimator = "equivalence";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  const MeanStats sw = mean_stats(gw), st = mean_stats(gt), si = mean_stats(iso);
  r.estimate = {sw.mean, st.mean, si.mean};
  r.std_error = {sw.std_error, st.std_error, si.std_error};
  r.diagnostics["gap_W"] = sw.mean;
  r.diagnostics["gap_TX"] = st.mean;
  r.diagnostics["max_gap_W"] = *std::max_element(gw.begin(), gw.end());
  r.diagnostics["max_gap_TX"] = *std::max_element(gt.begin(), gt.end());
  r.diagnostics["isometry_defect_W"] = si.mean;
  r.diagnostics["max_gram_defect"] = *std::max_element(gram.begin(), gram.end());
  r.diagnostics["gap_threshold"] = gap_threshold;
  r.checks["gap_W"] = r.diagnostics["max_gap_W"] <= gap_threshold;
  r.checks["gap_TX"] = r.diagnostics["max_gap_TX"] <= gap_threshold;
  r.per_path["gap_W"] = std::move(gw);
  r.per_path["gap_TX"] = std::move(gt);
  r.per_path["isometry_defect_W"] = std::move(iso);
  return r;
}

// ---------------------------------------------------------------------------

IntrinsicMartingale intrinsic_martingale(const SimConfig& cfg, const PathSample& path,
                                         const TransportTrace& trace) {
  if (trace.ricci_frame.empty()) throw ConfigError("intrinsic martingale needs curvature in the trace");
  const int n = cfg.family->dim();
  IntrinsicMartingale m;
  m.times = path.times;
  m.L.assign(1, Vec::Zero(n));
  m.realized_qv.assign(1, 0.0);
  m.predicted_qv.assign(1, 0.0);
  for (int k = 0; k < path.n_steps(); ++k) {
    const Vec dl = trace.ricci_frame[k] * trace.frame_noise[k];
    const double ds = path.times[k + 1] - path.times[k];
    m.L.push_back(m.L.back() + dl);
    m.realized_qv.push_back(m.realized_qv.back() + dl.squaredNorm());
    m.predicted_qv.push_back(m.predicted_qv.back() +
                             cfg.sigma * trace.ricci_frame[k].squaredNorm() * ds);
  }
  return m;
}

EstimatorReport intrinsic_martingale_check(const SimConfig& cfg, const ChartPoint& x0,
                                           const McOptions& mc, double rel_tol, int curve_points) {
  validate(cfg);
  const int n = cfg.family->dim();
  const std::vector<int> marks = checkpoint_steps(cfg.n_steps, curve_points);
  TransportOptions opt;
  opt.curvature = true;
  std::vector<Vec> l_end(mc.n_paths);
  std::vector<double> realized(mc.n_paths), predicted(mc.n_paths), max_l(mc.n_paths);
  std::vector<std::vector<double>> curve_r(mc.n_paths), curve_p(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x0, i);
    const IntrinsicMartingale m = intrinsic_martingale(cfg, path, evolve_transports(cfg, path, opt));
    l_end[i] = m.L.back();
    realized[i] = m.realized_qv.back();
    predicted[i] = m.predicted_qv.back();
    double worst = 0.0;
    for (const Vec& l : m.L) worst = std::max(worst, l.cwiseAbs().maxCoeff());
    max_l[i] = worst;
    for (int k : marks) {
      curve_r[i].push_back(m.realized_qv[k]);
      curve_p[i].push_back(m.predicted_qv[k]);
    }
  });
  EstimatorReport r;
  r.estimator = "intrinsic_martingale";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  const MeanStats sr = mean_stats(realized);
  const MeanStats sp = mean_stats(predicted);
  r.estimate = {sr.mean};
  r.std_error = {sr.std_error};
  r.diagnostics["realized_qv"] = sr.mean;
  r.diagnostics["predicted_qv"] = sp.mean;
  const double rel = sp.mean != 0.0 ? std::abs(sr.mean / sp.mean - 1.0) : std::abs(sr.mean);
  r.diagnostics["qv_relative_error"] = rel;
  r.diagnostics["max_abs_L"] = *std::max_element(max_l.begin(), max_l.end());
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const MeanStats s = mean_stats(component(l_end, i));
    r.diagnostics["mean_L_" + std::to_string(i + 1)] = s.mean;
    r.diagnostics["mean_L_" + std::to_string(i + 1) + "_std_error"] = s.std_error;
    worst = std::max(worst, normalized(s.mean, s.std_error));
  }
  r.diagnostics["mean_L_max_normalized"] = worst;
  r.checks["qv_relative_error"] = rel <= rel_tol;
  r.checks["mean_L_zero"] = worst <= 3.0;
  Table curve{{"t", "realized_qv", "predicted_qv"}, {}};
  std::vector<double> col(mc.n_paths);
  for (std::size_t j = 0; j < marks.size(); ++j) {
    for (std::size_t i = 0; i < mc.n_paths; ++i) col[i] = curve_r[i][j];
    const double mr = pairwise_sum(col) / static_cast<double>(mc.n_paths);
    for (std::size_t i = 0; i < mc.n_paths; ++i) col[i] = curve_p[i][j];
    const double mp = pairwise_sum(col) / static_cast<double>(mc.n_paths);
    curve.rows.push_back({cfg.time_at(marks[j]), mr, mp});
  }
  r.tables["qv_curve"] = std::move(curve);
  r.per_path["realized_qv"] = std::move(realized);
  r.per_path["predicted_qv"] = std::move(predicted);
  return r;
}

// ---------------------------------------------------------------------------

double expected_sampling_l1(const std::vector<double>& probabilities, std::size_t n_paths) {
  // E|K/N - p| for K ~ Bin(N, p) is 2 k C(N, k) p^k (1 - p)^(N - k + 1) / N, k = floor(Np) + 1.
  const double N = static_cast<double>(n_paths);
  double acc = 0.0;
  for (double p : probabilities) {
    if (p <= 0.0 || p >= 1.0) continue;
    const double k = std::floor(N * p) + 1.0;
    if (k > N) continue;
    const double log_term = std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0) +
                            k * std::log(p) + (N - k + 1.0) * std::log1p(-p);
    acc += 2.0 * k * std::exp(log_term) / N;
  }
  return acc;
}

EstimatorReport conjugate_heat_consistency(const SimConfig& cfg_in,
                                           std::shared_ptr<const TorusNrfFamily> family,
                                           const Vec& x0, const McOptions& mc,
                                           const ConjugateHeatOptions& opt) {
  if (!family) throw ConfigError("conjugate heat consistency needs a torus family");
  SimConfig cfg = cfg_in;
  cfg.family = family;
  validate(cfg);
  if (cfg.direction != TimeDirection::kForward)
    throw ConfigError("conjugate heat consistency uses the forward clock");
  const int n = family->solution().grid_n;

  TorusSolveOptions pde;
  pde.dt = opt.pde_dt;
  pde.sigma = cfg.sigma;
  pde.sample_interval = cfg.T / 10.0;
  const DensityField density = conjugate_solve_torus(family, x0, cfg.T, opt.requested_width, pde);
  const double width = density.mollifier_width;

  const double h = 2.0 * std::numbers::pi / n;
  std::vector<int> cell(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const NoiseStream noise(cfg.seed, i);
    double z[2];
    noise.aux_normals(0, 2, z);
    ChartPoint start(0, x0);
    start.coords[0] += width * z[0];
    start.coords[1] += width * z[1];
    family->normalize(start);
    const ChartPoint end = simulate_endpoint(cfg, start, i);
    const int a = static_cast<int>(std::floor(end.coords[0] / h + 0.5)) % n;
    const int b = static_cast<int>(std::floor(end.coords[1] / h + 0.5)) % n;
    cell[i] = a * n + b;
  });
  Field2D counts(n);
  for (int c : cell) counts.data[c] += 1.0;

  const Field2D pde_prob = density.cell_probabilities(density.times.size() - 1);
  double l1 = 0.0;
  for (std::size_t k = 0; k < counts.data.size(); ++k)
    l1 += std::abs(counts.data[k] / static_cast<double>(mc.n_paths) - pde_prob.data[k]);
  double mass_dev = 0.0;
  for (std::size_t k = 0; k < density.times.size(); ++k)
    mass_dev = std::max(mass_dev, std::abs(density.mass(k) - 1.0));

  EstimatorReport r;
  r.estimator = "conjugate_heat";
  echo_config(r, cfg);
  r.config_echo["grid_n"] = std::to_string(n);
  r.config_echo["pde_dt"] = num(opt.pde_dt);
  r.config_echo["mollifier_width"] = num(width);
  r.n_paths = mc.n_paths;
  r.estimate = {l1};
  r.std_error = {0.0};
  r.diagnostics["l1_distance"] = l1;
  r.diagnostics["l1_sampling_floor"] = expected_sampling_l1(pde_prob.data, mc.n_paths);
  r.diagnostics["max_mass_deviation"] = mass_dev;
  r.diagnostics["min_density"] = density.min_value;
  r.diagnostics["clipped_values"] = static_cast<double>(density.clipped);
  r.diagnostics["mollifier_width"] = width;
  r.checks["l1_distance"] = l1 <= opt.l1_threshold;
  r.checks["mass_conservation"] = mass_dev <= opt.mass_tol;
  if (mc.n_paths < static_cast<std::size_t>(10 * n * n))
    r.warnings.push_back("histogram underfilled: n_paths < 10 grid_n^2");
  if (r.diagnostics["l1_sampling_floor"] > opt.l1_threshold)
    r.warnings.push_back("l1 threshold is below the expected sampling noise of an exact histogram");
  if (density.clipped > 0)
    r.warnings.push_back("negative density clipped at " + std::to_string(density.clipped) + " grid values");
  Table hist{{"x1", "x2", "mc_probability", "pde_probability"}, {}};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      hist.rows.push_back({a * h, b * h, counts(a, b) / static_cast<double>(mc.n_paths), pde_prob(a, b)});
  r.tables["histogram"] = std::move(hist);
  return r;
}

namespace {

/// Trapezoid integral of R(metric_clock(s), X_s) along a path.
double integrated_scalar(const SimConfig& cfg, const TorusNrfFamily& family, const PathSample& path) {
  double acc = 0.0;
  double prev = family.scalar_field(metric_clock(cfg, path.times[0]), path.points[0]).value;
  for (int k = 1; k <= path.n_steps(); ++k) {
    const double cur = family.scalar_field(metric_clock(cfg, path.times[k]), path.points[k]).value;
    acc += 0.5 * (path.times[k] - path.times[k - 1]) * (prev + cur);
    prev = cur;
  }
  return acc;
}

}  // namespace

EstimatorReport phi_norm_identity_check(const SimConfig& cfg, const TorusNrfFamily& family,
                                        const ChartPoint& x0, const Vec& v, const McOptions& mc,
                                        double rel_tol) {
  validate(cfg);
  require_reversed(cfg, "the phi norm identity");
  TransportOptions opt;
  opt.phi = true;
  std::vector<double> rel(mc.n_paths), log_gap(mc.n_paths);
  parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
    const PathSample path = simulate_path(cfg, x0, i);
    const TransportTrace tr = evolve_transports(cfg, path, opt);
    const int last = path.n_steps();
    const double int_r = integrated_scalar(cfg, family, path);
    const Vec pv = tr.phi(last) * v;
    const double lhs = pv.dot(cfg.family->metric(metric_clock(cfg, cfg.T), path.points[last]) * pv);
    const double rhs = v.dot(cfg.family->metric(metric_clock(cfg, 0.0), path.points[0]) * v) *
                       std::exp(4.0 * int_r);
    rel[i] = std::abs(lhs / rhs - 1.0);
    log_gap[i] = std::abs(std::log(tr.q_phi[last](0, 0)) - 2.0 * int_r);
  });
  EstimatorReport r;
  r.estimator = "phi_norm_identity";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  const double worst = *std::max_element(rel.begin(), rel.end());
  r.estimate = {worst};
  r.std_error = {0.0};
  r.diagnostics["max_relative_error"] = worst;
  r.diagnostics["median_relative_error"] = median(rel);
  r.diagnostics["max_log_gap"] = *std::max_element(log_gap.begin(), log_gap.end());
  r.checks["norm_identity"] = worst <= rel_tol;
  r.per_path["relative_error"] = std::move(rel);
  return r;
}

double sup_scalar_gradient(const TorusNrfFamily& family, double t, int refine) {
  const int m = family.solution().grid_n * std::max(1, refine);
  const double h = 2.0 * std::numbers::pi / m;
  double sup = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vec x(2);
      x << a * h, b * h;
      const ChartPoint p(0, x);
      const FieldEval e = family.scalar_field(t, p);
      const double w = family.conformal(t, p).w;
      sup = std::max(sup, std::exp(-w) * std::hypot(e.d1, e.d2));
    }
  return sup;
}

EstimatorReport scalar_gradient_estimate_check(const SimConfig& cfg, const TorusNrfFamily& family,
                                               const std::vector<ChartPoint>& points,
                                               const McOptions& mc) {
  validate(cfg);
  require_reversed(cfg, "the scalar gradient estimate");
  if (points.empty()) throw ConfigError("scalar gradient check needs points");
  const double sup0 = sup_scalar_gradient(family, 0.0);
  EstimatorReport r;
  r.estimator = "scalar_gradient_estimate";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  r.diagnostics["sup_grad_R0"] = sup0;
  double min_slack = std::numeric_limits<double>::infinity();
  Table table{{"point", "lhs", "rhs", "rhs_std_error", "slack"}, {}};
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const ChartPoint& x = points[pi];
    const FieldEval e = family.scalar_field(cfg.T, x);
    const double lhs = std::exp(-family.conformal(cfg.T, x).w) * std::hypot(e.d1, e.d2);
    std::vector<double> weights(mc.n_paths);
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
      weights[i] = std::exp(2.0 * integrated_scalar(cfg, family, simulate_path(cfg, x, i)));
    });
    const MeanStats s = mean_stats(weights);
    const double rhs = sup0 * s.mean;
    const double slack = rhs - lhs;
    min_slack = std::min(min_slack, slack);
    table.rows.push_back({static_cast<double>(pi), lhs, rhs, sup0 * s.std_error, slack});
    r.estimate.push_back(lhs);
    r.estimate.push_back(rhs);
    r.std_error.push_back(0.0);
    r.std_error.push_back(sup0 * s.std_error);
  }
  r.diagnostics["min_slack"] = min_slack;
  r.checks["inequality"] = min_slack >= 0.0;
  r.tables["sides"] = std::move(table);
  return r;
}

EstimatorReport nrf_solve_report(const TorusFlowSolution& sol, double residual_tol, double volume_tol,
                                 double r_tol) {
  EstimatorReport r;
  r.estimator = "nrf_solve";
  r.config_echo["grid_n"] = std::to_string(sol.grid_n);
  r.config_echo["t_end"] = num(sol.times.back());
  r.config_echo["n_samples"] = std::to_string(sol.times.size());
  const double residual = curvature_equation_residual(sol);
  const double drift = volume_drift(sol);
  r.estimate = {residual};
  r.std_error = {0.0};
  r.diagnostics["curvature_residual"] = residual;
  r.diagnostics["volume_drift"] = drift;
  r.diagnostics["max_abs_r"] = sol.max_abs_r;
  r.checks["curvature_residual"] = residual <= residual_tol;
  r.checks["volume_conservation"] = drift <= volume_tol;
  r.checks["mean_curvature"] = sol.max_abs_r <= r_tol;
  Table trace{{"t", "volume", "max_abs_u", "max_abs_R"}, {}};
  for (std::size_t k = 0; k < sol.times.size(); ++k)
    trace.rows.push_back({sol.times[k], sol.volumes[k], sol.u[k].max_abs(), sol.R[k].max_abs()});
  r.tables["flow"] = std::move(trace);
  return r;
}

namespace {

void record(EstimatorReport& r, const std::string& name, double value, double tol) {
  r.diagnostics[name] = value;
  r.checks[name] = std::isfinite(value) && value <= tol;
}

ChartPoint chart_point(int chart, double a, double b) {
  Vec x(2);
  x << a, b;
  return ChartPoint(chart, x);
}

Field2D grid_function(int n, const std::function<double(double, double)>& f) {
  Field2D out(n);
  const double h = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = f(i * h, j * h);
  return out;
}

}  // namespace

EstimatorReport oracle_selftest() {
  EstimatorReport r;
  r.estimator = "oracle_selftest";
  const double pi = std::numbers::pi;

  // Flat torus: cos(x1) decays as exp(-t/2); constants stay constant.
  auto flat = std::make_shared<TorusNrfFamily>(static_torus_solution(Field2D(32)));
  {
    const double T = 0.5;
    const auto heat = heat_solve_torus(flat, grid_function(32, [](double x, double) { return std::cos(x); }), T);
    double err = 0.0;
    for (const auto& p : {chart_point(0, 0.3, 1.1), chart_point(0, 2.2, 4.0), chart_point(0, 5.9, 0.7)})
      err = std::max(err, std::abs(heat->value(T, p) - std::exp(-0.5 * T) * std::cos(p.coords[0])));
    record(r, "torus_single_mode_error", err, 1e-8);
    const auto constant = heat_solve_torus(flat, Field2D(32, 1.5), T);
    double dev = 0.0;
    for (double v : constant->frames().back().data) dev = std::max(dev, std::abs(v - 1.5));
    record(r, "torus_constant_error", dev, 1e-12);
  }

  // Flat torus conjugate solve against the wrapped Gaussian.
  Vec x0(2);
  x0 << 3.0, 3.0;
  {
    TorusSolveOptions opt;
    opt.sample_interval = 0.05;
    const DensityField d = conjugate_solve_torus(flat, x0, 0.5, 0.0, opt);
    const Field2D theta = flat_torus_theta_density(32, x0, d.mollifier_width, 1.0, 0.5);
    double err = 0.0;
    for (std::size_t i = 0; i < theta.data.size(); ++i)
      err = std::max(err, std::abs(theta.data[i] - d.values.back().data[i]));
    record(r, "theta_kernel_error", err, 1e-6);
  }

  // Torus flow: mass of the conjugate solve, Tr term on the kappa = 1 version,
  // heat residual at collocation points.
  NrfOptions flow;
  flow.t_end = 0.6;
  auto nrf = std::make_shared<TorusNrfFamily>(solve_nrf(cosine_field(32, 0.2), flow));
  {
    TorusSolveOptions opt;
    opt.sample_interval = 0.05;
    const DensityField d = conjugate_solve_torus(nrf, x0, 0.5, 0.0, opt);
    double dev = 0.0;
    for (std::size_t k = 0; k < d.times.size(); ++k) dev = std::max(dev, std::abs(d.mass(k) - 1.0));
    record(r, "conjugate_mass_deviation", dev, 1e-6);
  }
  {
    const ReparametrizedFamily ricci(nrf, 1.0, 2.0);
    double err = 0.0;
    for (double t : {0.1, 0.4, 0.9})
      for (const auto& p : {chart_point(0, 0.4, 1.0), chart_point(0, 3.0, 5.5)}) {
        const LocalGeometry g = ricci.local(t, p);
        err = std::max(err, std::abs(0.5 * g.dt_g_sharp.trace() + 0.5 * g.scalar));
      }
    record(r, "trace_term_error", err, 1e-6);
  }
  {
    Field2D u0 = cosine_field(64, 0.2);
    NrfOptions fine;
    fine.t_end = 0.12;
    fine.dt = 1e-4;
    fine.sample_interval = 1e-3;
    auto fam = std::make_shared<TorusNrfFamily>(solve_nrf(u0, fine));
    TorusSolveOptions opt;
    opt.dt = 1e-4;
    opt.sample_interval = 1e-3;
    const auto heat = heat_solve_torus(
        fam, grid_function(64, [](double x, double y) { return std::sin(x) + 0.5 * std::cos(x + 2.0 * y); }), 0.1,
        opt);
    const NoiseStream rng(20240611, 0);
    double res = 0.0;
    for (std::uint32_t k = 0; k < 16; ++k) {
      const double t = 0.02 + 0.06 * rng.aux_uniform(3 * k);
      const ChartPoint p = chart_point(0, 2.0 * pi * rng.aux_uniform(3 * k + 1), 2.0 * pi * rng.aux_uniform(3 * k + 2));
      res = std::max(res, std::abs(heat->residual(t, p)));
    }
    record(r, "torus_heat_residual", res, 1e-6);
  }

  // Duality on a static conformal torus: int f(T) delta = int f0 h(T) d mu_T.
  {
    auto fam = std::make_shared<TorusNrfFamily>(static_torus_solution(cosine_field(32, 0.3, 1, 1)));
    const double T = 0.4;
    const Field2D f0 = grid_function(32, [](double x, double y) { return std::cos(x) * std::sin(2.0 * y) + 0.3 * std::sin(y); });
    TorusSolveOptions opt;
    opt.sample_interval = 0.1;
    const auto heat = heat_solve_torus(fam, f0, T, opt);
    const DensityField d = conjugate_solve_torus(fam, x0, T, 0.0, opt);
    const Field2D p0 = periodic_gaussian(32, x0, d.mollifier_width);
    const Field2D& fT = heat->frames().back();
    const Field2D& hT = d.values.back();
    const Field2D& wT = d.weights.back();
    const double cell = std::pow(2.0 * pi / 32, 2);
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t i = 0; i < f0.data.size(); ++i) {
      lhs += fT.data[i] * p0.data[i] * cell;
      rhs += f0.data[i] * hT.data[i] * wT.data[i] * cell;
    }
    r.diagnostics["duality_lhs"] = lhs;
    r.diagnostics["duality_rhs"] = rhs;
    record(r, "duality_gap", std::abs(lhs - rhs), 1e-5);
  }

  // Shrinking sphere: harmonic decay through the time change, the heat
  // equation by finite differences, and differentials in both charts.
  {
    auto sph = std::make_shared<SphereFamily>(2, 2.0);
    const SphereHeatSolution heat(sph, {AmbientFunction::linear(2), AmbientFunction::product(0, 1)});
    const double tau = std::log(0.6) / -2.0;
    const ChartPoint p = chart_point(0, 0.3, -0.7);
    const Vec q = SphereFamily::ambient(p);
    const double expected = std::exp(-tau) * q[2] + std::exp(-3.0 * tau) * q[0] * q[1];
    record(r, "sphere_decay_error", std::abs(heat.value(0.2, p) - expected), 1e-12);

    const double t = 0.15;
    const double e = 1e-5;
    const double dtf = (heat.value(t + e, p) - heat.value(t - e, p)) / (2.0 * e);
    record(r, "sphere_heat_residual", std::abs(dtf - 0.5 * heat.laplacian(t, p)), 1e-6);

    double diff = 0.0;
    for (const auto& x : {p, chart_point(1, 0.2, 0.5)}) {
      const Vec d = heat.differential(t, x);
      for (int i = 0; i < 2; ++i) {
        ChartPoint a = x;
        ChartPoint b = x;
        a.coords[i] += 1e-5;
        b.coords[i] -= 1e-5;
        diff = std::max(diff, std::abs(d[i] - (heat.value(t, a) - heat.value(t, b)) / 2e-5));
      }
    }
    record(r, "sphere_differential_error", diff, 1e-6);
  }

  r.estimate = {static_cast<double>(std::count_if(r.checks.begin(), r.checks.end(),
                                                  [](const auto& c) { return !c.second; }))};
  r.std_error = {0.0};
  return r;
}

}  // namespace flowbm
