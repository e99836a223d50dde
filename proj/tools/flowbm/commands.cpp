#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>

#include "flowbm/errors.hpp"
#include "flowbm/family_factory.hpp"
#include "flowbm/flow_solver.hpp"
#include "flowbm/pde_oracle.hpp"
#include "flowbm/stats.hpp"
#include "output.hpp"

namespace flowbm::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

// ---------------------------------------------------------------------------
// Config readers. They only parse; nothing expensive runs until every key of
// the subcommand has been read and unknown keys have been rejected.

FamilySpec read_family(const ExperimentConfig& c, const std::string& snapshot) {
  FamilySpec s;
  s.name = c.get_string("family.name", s.name);
  s.dim = c.get_int("family.dim", s.dim);
  s.kappa = c.get_double("family.kappa", s.kappa);
  s.radius = c.get_double("family.radius", s.radius);
  s.grid_n = c.get_int("family.grid_n", s.grid_n);
  s.snapshot = c.get_string("family.snapshot", snapshot);
  s.amplitude = c.get_double("family.amplitude", s.amplitude);
  s.mode_k1 = c.get_int("family.mode_k1", s.mode_k1);
  s.mode_k2 = c.get_int("family.mode_k2", s.mode_k2);
  s.amplitude2 = c.get_double("family.amplitude2", s.amplitude2);
  s.mode2_k1 = c.get_int("family.mode2_k1", s.mode2_k1);
  s.mode2_k2 = c.get_int("family.mode2_k2", s.mode2_k2);
  s.frozen = c.get_bool("family.frozen", s.frozen);
  s.flow_t_end = c.get_double("family.flow_t_end", s.flow_t_end);
  s.flow_dt = c.get_double("family.flow_dt", s.flow_dt);
  if (!snapshot.empty() && c.has("family.snapshot") && s.snapshot != snapshot)
    throw ConfigError("--snapshot and family.snapshot disagree");
  return s;
}

struct SimSettings {
  double T = 0.5;
  int n_steps = 500;
  double sigma = 1.0;
  TimeDirection direction = TimeDirection::kForward;
  std::uint64_t seed = kDefaultSeed;
  double switch_threshold = 1.5;
};

TimeDirection parse_direction(const ExperimentConfig& c, const std::string& key, TimeDirection fallback) {
  const std::string d = c.get_string(key, fallback == TimeDirection::kForward ? "forward" : "reversed");
  if (d == "forward") return TimeDirection::kForward;
  if (d == "reversed") return TimeDirection::kReversed;
  throw ConfigError(c.where(key) + ": " + key + ": expected forward or reversed, got '" + d + "'");
}

SimSettings read_sim(const ExperimentConfig& c, TimeDirection direction) {
  SimSettings s;
  s.T = c.get_double("sim.T", s.T);
  if (c.has("sim.n_steps") && c.has("sim.dt"))
    throw ConfigError(c.where("sim.dt") + ": give either sim.n_steps or sim.dt, not both");
  if (c.has("sim.dt")) {
    const double dt = c.get_double("sim.dt", 1e-3);
    if (!(dt > 0.0)) throw ConfigError(c.where("sim.dt") + ": sim.dt must be positive");
    s.n_steps = static_cast<int>(std::lround(s.T / dt));
  } else {
    s.n_steps = c.get_int("sim.n_steps", static_cast<int>(std::lround(s.T / 1e-3)));
  }
  s.sigma = c.get_double("sim.sigma", s.sigma);
  s.direction = parse_direction(c, "sim.direction", direction);
  s.seed = c.get_u64("sim.seed", s.seed);
  s.switch_threshold = c.get_double("sim.switch_threshold", s.switch_threshold);
  return s;
}

SimConfig make_sim(const SimSettings& s, FamilyPtr family) {
  SimConfig cfg;
  cfg.family = std::move(family);
  cfg.T = s.T;
  cfg.n_steps = s.n_steps;
  cfg.sigma = s.sigma;
  cfg.direction = s.direction;
  cfg.seed = s.seed;
  cfg.switch_threshold = s.switch_threshold;
  validate(cfg);
  return cfg;
}

McOptions read_mc(const ExperimentConfig& c, int threads, std::size_t paths, const std::string& key = "estimator.n_paths") {
  const std::uint64_t n = c.get_u64(key, paths);
  if (n == 0) throw ConfigError(c.where(key) + ": " + key + " must be positive");
  return {static_cast<std::size_t>(n), threads};
}

Vec read_vec(const ExperimentConfig& c, const std::string& key, const std::vector<double>& fallback) {
  const std::vector<double> v = c.get_list(key, fallback);
  if (v.size() > 4) throw ConfigError(c.where(key) + ": " + key + " has more than 4 components");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

ChartPoint read_point(const ExperimentConfig& c, const std::string& key, const std::vector<double>& fallback) {
  const int chart = c.get_int(key + "_chart", 0);
  return ChartPoint(chart, read_vec(c, key, fallback));
}

std::vector<ChartPoint> read_points(const ExperimentConfig& c, const std::string& key, const std::vector<Vec>& fallback) {
  const int chart = c.get_int(key + "_chart", 0);
  std::vector<ChartPoint> out;
  for (const Vec& p : c.get_points(key, fallback)) out.emplace_back(chart, p);
  return out;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// ---------------------------------------------------------------------------
// Test functions f0.

struct TestFunction {
  std::string name;
  PointFn fn;
  double sup = 1.0;
  std::optional<AmbientFunction> ambient;
  std::function<double(double, double)> coords;
};

TestFunction make_test_function(const std::string& name, const FamilySpec& family) {
  TestFunction f;
  f.name = name;
  if (family.name == "sphere") {
    auto index = [&](char ch) {
      const int i = ch - '1';
      if (i < 0 || i > family.dim) throw ConfigError("f0 '" + name + "': ambient index out of range");
      return i;
    };
    if (name.size() == 2 && name[0] == 'p') {
      f.ambient = AmbientFunction::linear(index(name[1]));
    } else if (name.size() == 4 && name[0] == 'p' && name[2] == 'p' && name[1] != name[3]) {
      f.ambient = AmbientFunction::product(index(name[1]), index(name[3]));
    } else if (name.size() == 6 && name.rfind("exp_p", 0) == 0) {
      f.ambient = AmbientFunction::exp(index(name[5]));
    } else {
      throw ConfigError("unknown sphere test function '" + name + "' (p<i>, p<i>p<j>, exp_p<i>)");
    }
    const AmbientFunction a = *f.ambient;
    f.fn = [a](const ChartPoint& p) { return a.value(SphereFamily::ambient(p)); };
    f.sup = a.sup_norm();
    return f;
  }
  if (family.dim != 2) throw ConfigError("coordinate test functions need a two-dimensional family");
  if (name == "cos_x1") f.coords = [](double x, double) { return std::cos(x); };
  else if (name == "sin_x1") f.coords = [](double x, double) { return std::sin(x); };
  else if (name == "cos_x2") f.coords = [](double, double y) { return std::cos(y); };
  else if (name == "sin_x2") f.coords = [](double, double y) { return std::sin(y); };
  else if (name == "cos_x1_plus_x2") f.coords = [](double x, double y) { return std::cos(x + y); };
  else throw ConfigError("unknown test function '" + name + "' (cos_x1, sin_x1, cos_x2, sin_x2, cos_x1_plus_x2)");
  const auto g = f.coords;
  f.fn = [g](const ChartPoint& p) { return g(p.coords[0], p.coords[1]); };
  return f;
}

/// Exact or PDE differential df(T, .)_x, when an oracle covers the family.
std::optional<Vec> oracle_differential(const SimConfig& cfg, const TestFunction& f, const ChartPoint& x) {
  if (auto sph = std::dynamic_pointer_cast<const SphereFamily>(cfg.family); sph && f.ambient) {
    if (f.ambient->degree() < 0) return std::nullopt;
    return SphereHeatSolution(sph, {*f.ambient}, cfg.sigma).differential(cfg.T, x);
  }
  if (auto torus = std::dynamic_pointer_cast<const TorusNrfFamily>(cfg.family); torus && f.coords) {
    const int n = torus->solution().grid_n;
    Field2D f0(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f0(i, j) = f.coords(f0.node(i), f0.node(j));
    TorusSolveOptions opt;
    opt.sigma = cfg.sigma;
    opt.sample_interval = cfg.T / 10.0;
    return heat_solve_torus(torus, f0, cfg.T, opt)->differential(cfg.T, x);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct Output {
  bool csv = true;
};

Output read_output(const ExperimentConfig& c) {
  Output o;
  o.csv = c.get_bool("output.csv", o.csv);
  c.has("output.dir");  // resolved by the front end
  c.has("experiment.name");
  return o;
}

void echo_entries(EstimatorReport& r, const RunContext& ctx) {
  r.config_echo["subcommand"] = ctx.subcommand;
  for (const auto& [key, value] : ctx.config.entries()) r.config_echo["config." + key] = value;
}

FamilyPtr build_family(const FamilySpec& spec) { return make_family(spec); }

std::shared_ptr<const TorusNrfFamily> build_torus(const FamilySpec& spec) {
  if (spec.name != "torus_nrf") throw ConfigError("this subcommand needs family.name = torus_nrf");
  return make_torus_family(spec);
}

// ---------------------------------------------------------------------------
// Subcommands.

using Reports = std::vector<EstimatorReport>;

Reports cmd_simulate(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kForward);
  const McOptions mc = read_mc(c, ctx.threads, 1000);
  const ChartPoint x0 = read_point(c, "estimator.x0", {0.3, 0.2});
  const int write_paths = c.get_int("estimator.write_paths", 0);
  read_output(c);
  c.reject_unused();

  const SimConfig cfg = make_sim(ss, build_family(fs));
  const std::vector<ChartPoint> ends = simulate_endpoints(cfg, x0, mc.n_paths, mc.threads);
  EstimatorReport r;
  r.estimator = "simulate";
  echo_config(r, cfg);
  r.n_paths = mc.n_paths;
  auto& chart = r.per_path["chart"];
  for (const ChartPoint& e : ends) {
    chart.push_back(e.chart);
    for (int k = 0; k < e.coords.size(); ++k) r.per_path["x" + std::to_string(k + 1)].push_back(e.coords[k]);
  }
  // g(0)-distance from x0 where the family has it in closed form.
  std::vector<double> dist;
  try {
    for (const ChartPoint& e : ends) dist.push_back(cfg.family->distance0(x0, e));
  } catch (const UnsupportedError& e) {
    dist.clear();
    r.warnings.push_back(std::string("no distance statistic: ") + e.what());
  }
  if (!dist.empty()) {
    r.per_path["distance0"] = dist;
    const MeanStats m = mean_stats(dist);
    r.estimate = {m.mean};
    r.std_error = {m.std_error};
    r.diagnostics["mean_distance0"] = m.mean;
  }
  std::filesystem::create_directories(ctx.out_dir);
  for (int i = 0; i < write_paths && i < static_cast<int>(mc.n_paths); ++i) {
    std::ofstream out(ctx.out_dir / ("path_" + std::to_string(i) + ".csv"));
    write_path_csv(out, cfg, simulate_path(cfg, x0, static_cast<std::uint64_t>(i)));
  }
  return {r};
}

Reports cmd_transport_check(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kForward);
  const McOptions mc = read_mc(c, ctx.threads, 200);
  const ChartPoint x0 = read_point(c, "estimator.x0", {0.5, 0.2});
  const double tol = c.get_double("estimator.tol_frame", 5e-2);
  const int write_transport = c.get_int("estimator.write_transport", 0);
  read_output(c);
  c.reject_unused();

  const SimConfig cfg = make_sim(ss, build_family(fs));
  EstimatorReport r = frame_isometry_check(cfg, x0, mc, tol);
  std::filesystem::create_directories(ctx.out_dir);
  for (int i = 0; i < write_transport && i < static_cast<int>(mc.n_paths); ++i) {
    std::ofstream out(ctx.out_dir / ("transport_" + std::to_string(i) + ".csv"));
    write_transport_csv(out, evolve_frame(cfg, simulate_path(cfg, x0, static_cast<std::uint64_t>(i))));
  }
  return {r};
}

Reports cmd_equivalence(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kReversed);
  const McOptions mc = read_mc(c, ctx.threads, 200);
  const ChartPoint x0 = read_point(c, "estimator.x0", {0.3, 0.2});
  const double gap = c.get_double("estimator.gap_threshold", 5e-2);
  read_output(c);
  c.reject_unused();
  return {equivalence_check(make_sim(ss, build_family(fs)), x0, mc, gap)};
}

Reports cmd_bismut(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kReversed);
  const McOptions mc = read_mc(c, ctx.threads, 10000);
  const ChartPoint x = read_point(c, "estimator.x0", {1.0, 2.0});
  const Vec v = read_vec(c, "estimator.v", {1.0, 0.0});
  const TestFunction f = make_test_function(c.get_string("estimator.f0", fs.name == "sphere" ? "p3" : "cos_x1"), fs);
  const double z = c.get_double("estimator.z", 3.0);
  const bool use_oracle = c.get_bool("estimator.oracle", true);
  read_output(c);
  c.reject_unused();

  const SimConfig cfg = make_sim(ss, build_family(fs));
  EstimatorReport r = bismut_gradient(cfg, f.fn, x, v, mc);
  r.config_echo["f0"] = f.name;
  double combined = 0.0;
  for (int i = 0; i < v.size(); ++i) combined += v[i] * r.diagnostics.at("df_" + std::to_string(i + 1));
  r.diagnostics["linearity_gap"] = std::abs(combined - r.estimate[0]);
  r.checks["linearity"] = r.diagnostics["linearity_gap"] <= 1e-12;
  if (use_oracle) {
    if (const auto exact = oracle_differential(cfg, f, x)) {
      const double e = exact->dot(v);
      const double zs = std::abs(r.estimate[0] - e) / r.std_error[0];
      r.diagnostics["oracle_dfv"] = e;
      r.diagnostics["oracle_z"] = zs;
      r.checks["oracle_agreement"] = zs <= z;
    } else {
      r.warnings.push_back("no oracle for this family and test function");
    }
  }
  return {r};
}

Reports cmd_gradient_bound(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kReversed);
  const McOptions mc = read_mc(c, ctx.threads, 4000);
  const std::vector<ChartPoint> pts =
      read_points(c, "estimator.points", {vec2(1.0, 0.0), vec2(0.6, 0.6), vec2(0.3, 0.1)});
  const std::vector<double> times = c.get_list("estimator.times", {0.25, 1.0});
  const TestFunction f = make_test_function(c.get_string("estimator.f0", fs.name == "sphere" ? "p3" : "cos_x1"), fs);
  const double z = c.get_double("estimator.z", 3.0);
  read_output(c);
  c.reject_unused();

  EstimatorReport r = gradient_bound_check(make_sim(ss, build_family(fs)), f.fn, f.sup, pts, times, mc, z);
  r.config_echo["f0"] = f.name;
  return {r};
}

Reports cmd_time_change(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kForward);
  const McOptions mc = read_mc(c, ctx.threads, 10000);
  const ChartPoint x0 = read_point(c, "estimator.x0", {0.0, 0.0});
  const std::string test = c.get_string("estimator.test", "time_change");
  const double p = c.get_double("estimator.p_threshold", 0.01);
  double scale = 2.0;
  if (test == "scaling") scale = c.get_double("estimator.scale_c", scale);
  else if (test != "time_change")
    throw ConfigError(c.where("estimator.test") + ": estimator.test: expected time_change or scaling, got '" + test + "'");
  read_output(c);
  c.reject_unused();

  const SimConfig cfg = make_sim(ss, build_family(fs));
  if (test == "scaling") return {scaling_law_test(cfg, scale, x0, mc, p)};
  return {time_change_law_test(cfg, x0, mc, p)};
}

Reports cmd_conjugate_heat(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kForward);
  const McOptions mc = read_mc(c, ctx.threads, 100000);
  const Vec x0 = read_vec(c, "estimator.x0", {std::numbers::pi, std::numbers::pi});
  ConjugateHeatOptions opt;
  opt.requested_width = c.get_double("estimator.mollifier_width", opt.requested_width);
  opt.pde_dt = c.get_double("estimator.pde_dt", opt.pde_dt);
  opt.l1_threshold = c.get_double("estimator.l1_threshold", opt.l1_threshold);
  opt.mass_tol = c.get_double("estimator.mass_tol", opt.mass_tol);
  const bool save = c.get_bool("estimator.save_density", false);
  read_output(c);
  c.reject_unused();

  const auto fam = build_torus(fs);
  const SimConfig cfg = make_sim(ss, fam);
  EstimatorReport r = conjugate_heat_consistency(cfg, fam, x0, mc, opt);
  if (save) {
    TorusSolveOptions pde;
    pde.dt = opt.pde_dt;
    pde.sigma = cfg.sigma;
    pde.sample_interval = cfg.T / 10.0;
    std::filesystem::create_directories(ctx.out_dir);
    save_density_field((ctx.out_dir / "density.snapshot").string(),
                       conjugate_solve_torus(fam, x0, cfg.T, opt.requested_width, pde));
  }
  return {r};
}

Reports cmd_martingale_l(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  const SimSettings ss = read_sim(c, TimeDirection::kReversed);
  const McOptions mc = read_mc(c, ctx.threads, 1000);
  const ChartPoint x0 = read_point(c, "estimator.x0", {0.3, 0.2});
  const double rel = c.get_double("estimator.rel_tol", 0.05);
  const int curve = c.get_int("estimator.curve_points", 20);
  read_output(c);
  c.reject_unused();
  return {intrinsic_martingale_check(make_sim(ss, build_family(fs)), x0, mc, rel, curve)};
}

Reports cmd_scalar_estimate(RunContext& ctx) {
  const auto& c = ctx.config;
  const FamilySpec fs = read_family(c, ctx.snapshot);
  SimSettings ss = read_sim(c, TimeDirection::kReversed);
  if (!c.has("sim.sigma")) ss.sigma = 2.0;
  const McOptions mc = read_mc(c, ctx.threads, 10000);
  const std::vector<ChartPoint> pts =
      read_points(c, "estimator.points", {vec2(1.0, 0.5), vec2(2.5, 1.0), vec2(4.0, 3.0)});
  const ChartPoint x0 = read_point(c, "estimator.x0", {1.0, 0.5});
  const Vec v = read_vec(c, "estimator.v", {1.0, 0.0});
  const std::uint64_t drift_paths = c.get_u64("estimator.drift_paths", 0);
  const int checkpoints = c.get_int("estimator.drift_checkpoints", 5);
  const double drift_threshold = c.get_double("estimator.drift_threshold", 3.0);
  const std::uint64_t norm_paths = c.get_u64("estimator.norm_paths", 0);
  const double norm_dt = c.get_double("estimator.norm_dt", 1e-4);
  const double rel = c.get_double("estimator.rel_tol", 0.01);
  read_output(c);
  c.reject_unused();

  const auto fam = build_torus(fs);
  const SimConfig cfg = make_sim(ss, fam);
  Reports out{scalar_gradient_estimate_check(cfg, *fam, pts, mc)};
  if (drift_paths > 0) {
    const std::vector<int> marks = checkpoint_steps(cfg.n_steps, checkpoints);
    std::vector<double> times;
    for (int k : marks) times.push_back(cfg.time_at(k));
    EstimatorReport d = martingale_drift_test(
        phi_martingale_samples(cfg, *fam, x0, v, marks, {static_cast<std::size_t>(drift_paths), mc.threads}), times,
        drift_threshold);
    d.estimator = "phi_martingale_drift";
    echo_config(d, cfg);
    out.push_back(std::move(d));
  }
  if (norm_paths > 0) {
    SimSettings fine = ss;
    fine.n_steps = static_cast<int>(std::lround(ss.T / norm_dt));
    out.push_back(phi_norm_identity_check(make_sim(fine, fam), *fam, x0, v,
                                          {static_cast<std::size_t>(norm_paths), mc.threads}, rel));
  }
  return out;
}

Reports cmd_nrf_solve(RunContext& ctx) {
  const auto& c = ctx.config;
  FamilySpec fs = read_family(c, "");
  if (fs.name != "torus_nrf") throw ConfigError("nrf-solve needs family.name = torus_nrf");
  const double interval = c.get_double("estimator.sample_interval", 0.01);
  const double residual_tol = c.get_double("estimator.residual_tol", 1e-3);
  const double volume_tol = c.get_double("estimator.volume_tol", 1e-6);
  const double r_tol = c.get_double("estimator.r_tol", 1e-8);
  std::string target = c.get_string("output.snapshot", "");
  read_output(c);
  c.reject_unused();
  if (!ctx.snapshot.empty()) target = ctx.snapshot;
  if (target.empty()) target = (ctx.out_dir / "flow.snapshot").string();

  const Field2D u0 = initial_conformal_factor(fs);
  NrfOptions opt;
  opt.t_end = fs.flow_t_end;
  opt.dt = fs.flow_dt > 0.0 ? fs.flow_dt : std::min(1e-3, 0.9 * nrf_max_dt(u0));
  opt.sample_interval = std::max(opt.dt, std::round(interval / opt.dt) * opt.dt);
  const TorusFlowSolution sol = solve_nrf(u0, opt);
  const std::filesystem::path snap(target);
  if (snap.has_parent_path()) std::filesystem::create_directories(snap.parent_path());
  save_flow_snapshot(target, sol);
  EstimatorReport r = nrf_solve_report(sol, residual_tol, volume_tol, r_tol);
  r.config_echo["flow_dt"] = format_number(opt.dt);
  r.config_echo["sample_interval"] = format_number(opt.sample_interval);
  r.config_echo["snapshot"] = target;
  return {r};
}

Reports cmd_oracle_selftest(RunContext& ctx) {
  read_output(ctx.config);
  ctx.config.reject_unused();
  return {oracle_selftest()};
}

struct Entry {
  SubcommandInfo info;
  Reports (*run)(RunContext&);
};

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries{
      {{"simulate", "simulate g(t)-Brownian paths and write endpoints"}, cmd_simulate},
      {{"transport-check", "Gram defect of the transported frame"}, cmd_transport_check},
      {{"equivalence", "damped / variation transports against parallel transport"}, cmd_equivalence},
      {{"bismut", "Bismut gradient estimate, compared with the heat oracle"}, cmd_bismut},
      {{"gradient-bound", "sup of the Bismut gradient against |f0|_inf / sqrt(T)"}, cmd_gradient_bound},
      {{"time-change", "KS law test of the time change (or scaling)"}, cmd_time_change},
      {{"conjugate-heat", "MC histogram against the conjugate heat solve"}, cmd_conjugate_heat},
      {{"martingale-l", "quadratic variation of the intrinsic martingale"}, cmd_martingale_l},
      {{"scalar-estimate", "scalar-curvature gradient estimate on the torus flow"}, cmd_scalar_estimate},
      {{"nrf-solve", "solve the torus flow and save a snapshot"}, cmd_nrf_solve},
      {{"oracle-selftest", "deterministic self-consistency of the PDE oracles"}, cmd_oracle_selftest},
  };
  return entries;
}

}  // namespace

const std::vector<SubcommandInfo>& subcommands() {
  static const std::vector<SubcommandInfo> infos = [] {
    std::vector<SubcommandInfo> out;
    for (const Entry& e : table()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

bool is_subcommand(const std::string& name) {
  for (const Entry& e : table())
    if (name == e.info.name) return true;
  return false;
}

std::vector<EstimatorReport> run_subcommand(RunContext& ctx) {
  for (const Entry& e : table()) {
    if (ctx.subcommand != e.info.name) continue;
    Reports reports = e.run(ctx);
    for (EstimatorReport& r : reports) echo_entries(r, ctx);
    return reports;
  }
  throw ConfigError("unknown subcommand '" + ctx.subcommand + "'");
}

}  // namespace flowbm::cli
