#include "app.hpp"

#include <algorithm>
#include <exception>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "flowbm/errors.hpp"
#include "output.hpp"

namespace flowbm::cli {

namespace {

std::string subcommand_list() {
  std::string s = "Subcommands:\n";
  for (const SubcommandInfo& info : subcommands()) {
    std::string name = info.name;
    name.resize(std::max<std::size_t>(name.size() + 2, 18), ' ');
    s += "  " + name + info.summary + "\n";
  }
  return s;
}

void print_summary(std::ostream& out, const EstimatorReport& r) {
  out << r.estimator << ": " << (r.passed() ? "PASS" : "FAIL");
  for (const auto& [name, ok] : r.checks)
    if (!ok) out << " [" << name << " failed]";
  out << '\n';
  for (const auto& [name, value] : r.diagnostics) out << "  " << name << " = " << format_number(value) << '\n';
  for (const std::string& w : r.warnings) out << "  warning: " << w << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Brownian motion under geometric flows: simulation, transports and estimators", "flowbm"};
  app.footer(subcommand_list());
  std::string subcommand;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string snapshot;
  app.add_option("subcommand", subcommand, "What to run")->required();
  app.add_option("--config", config_path, "Experiment file (INI sections)");
  app.add_option("--set", overrides, "Override section.key=value (repeatable)")->take_all();
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides sim.seed)");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--snapshot", snapshot, "Flow snapshot to read (nrf-solve: to write)");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitError;
  }
  if (!is_subcommand(subcommand)) {
    err << "error: unknown subcommand '" << subcommand << "'\n\n" << app.help();
    return kExitError;
  }

  try {
    RunContext ctx;
    ctx.subcommand = subcommand;
    ctx.threads = threads;
    ctx.snapshot = snapshot;
    if (!config_path.empty()) ctx.config = ExperimentConfig::load(config_path);
    for (const std::string& o : overrides) ctx.config.set(o);
    if (seed_opt->count() > 0) ctx.config.set("sim.seed=" + std::to_string(seed));
    std::string dir = ctx.config.get_string("output.dir", "");
    if (!out_dir.empty()) dir = out_dir;
    if (dir.empty()) dir = "flowbm_out/" + subcommand;
    ctx.out_dir = dir;

    const std::vector<EstimatorReport> reports = run_subcommand(ctx);
    const bool csv = ctx.config.get_bool("output.csv", true);
    bool pass = true;
    for (const EstimatorReport& r : reports) {
      print_summary(out, r);
      for (const auto& path : emit_report(ctx.out_dir, r, csv)) out << "  wrote " << path.string() << '\n';
      pass = pass && r.passed();
    }
    return pass ? kExitPass : kExitThreshold;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace flowbm::cli
