#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "flowbm");
  std::ostringstream out;
  std::ostringstream err;
  const int code = flowbm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flowbm_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::string> kSmallEquivalence{
    "equivalence", "--set", "family.name=sphere", "--set", "family.kappa=1", "--set", "sim.T=0.5",
    "--set", "sim.n_steps=100", "--set", "estimator.n_paths=20"};

}  // namespace

TEST_CASE("unknown subcommand prints usage and exits 1") {
  const Result r = run({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("unknown subcommand") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(r.err.find("oracle-selftest") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("oracle-selftest exits 0") {
  const fs::path dir = scratch("selftest");
  const Result r = run({"oracle-selftest", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "oracle_selftest.json"));
}

TEST_CASE("equivalence report and threshold failure exit code") {
  const fs::path dir = scratch("equivalence");
  std::vector<std::string> args = kSmallEquivalence;
  args.insert(args.end(), {"--out", dir.string()});
  const Result ok = run(args);
  CHECK(ok.code == 0);
  const std::string json = slurp(dir / "equivalence.json");
  CHECK(json.find("\"gap_W\"") != std::string::npos);
  CHECK(json.find("\"gap_TX\"") != std::string::npos);

  // The static sphere opens a gap of 1 - exp(-T/2) > 5e-2.
  args.insert(args.end(), {"--set", "family.kappa=0"});
  CHECK(run(args).code == 2);
}

TEST_CASE("config errors exit 1 with a location") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "bad.ini");
    f << "[family]\nname = sphere\n\n[sim]\nT = often\n";
  }
  Result r = run({"simulate", "--config", (dir / "bad.ini").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.ini:5") != std::string::npos);
  CHECK(r.err.find("sim.T") != std::string::npos);

  {
    std::ofstream f(dir / "typo.ini");
    f << "[family]\nnmae = sphere\n";
  }
  r = run({"simulate", "--config", (dir / "typo.ini").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("typo.ini:2") != std::string::npos);

  CHECK(run({"simulate", "--config", (dir / "missing.ini").string()}).code == 1);
  CHECK(run({"simulate", "--set", "novalue"}).code == 1);
  CHECK(run({"simulate", "--set", "sim.direction=sideways"}).code == 1);
  CHECK(run({"simulate", "--threads", "-2"}).code == 1);
  CHECK(run({"conjugate-heat", "--set", "family.name=sphere"}).code == 1);
}

TEST_CASE("outputs are deterministic and follow the seed") {
  auto files = [](const fs::path& dir, std::vector<std::string> extra) {
    std::vector<std::string> args = kSmallEquivalence;
    args.insert(args.end(), {"--out", dir.string()});
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(run(args).code == 0);
    return slurp(dir / "equivalence_per_path.csv");
  };
  const std::string a = files(scratch("det_a"), {});
  const std::string b = files(scratch("det_b"), {"--threads", "3"});
  const std::string c = files(scratch("det_c"), {"--seed", "5"});
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.rfind("path,", 0) == 0);
}

TEST_CASE("plot data schemas") {
  const fs::path dir = scratch("martingale");
  const Result r = run({"martingale-l", "--out", dir.string(), "--set", "family.name=sphere", "--set",
                        "family.kappa=1", "--set", "sim.T=0.5", "--set", "sim.n_steps=200", "--set",
                        "estimator.n_paths=20", "--set", "estimator.rel_tol=1"});
  CHECK(r.code == 0);
  const std::string qv = slurp(dir / "intrinsic_martingale_qv_curve.csv");
  CHECK(qv.rfind("t,realized_qv,predicted_qv\n", 0) == 0);
}

TEST_CASE("nrf-solve writes a snapshot that other subcommands can read") {
  const fs::path dir = scratch("nrf");
  const std::string snap = (dir / "flow.snapshot").string();
  Result r = run({"nrf-solve", "--out", dir.string(), "--snapshot", snap, "--set", "family.name=torus_nrf", "--set",
                  "family.grid_n=16", "--set", "family.flow_t_end=0.2", "--set", "estimator.sample_interval=0.001"});
  CHECK(r.code == 0);
  REQUIRE(fs::exists(snap));
  r = run({"simulate", "--out", dir.string(), "--snapshot", snap, "--set", "family.name=torus_nrf", "--set",
           "sim.T=0.1", "--set", "sim.n_steps=20", "--set", "estimator.n_paths=5", "--set", "estimator.x0=1, 1"});
  CHECK(r.code == 0);
}
