#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "flowbm/estimators.hpp"

namespace flowbm::cli {

struct RunContext {
  ExperimentConfig config;
  std::string subcommand;
  int threads = 1;
  /// Output directory after --out / [output] dir resolution.
  std::filesystem::path out_dir;
  /// --snapshot: flow snapshot to read (or to write, for nrf-solve).
  std::string snapshot;
};

struct SubcommandInfo {
  const char* name;
  const char* summary;
};

const std::vector<SubcommandInfo>& subcommands();
bool is_subcommand(const std::string& name);

/// Reads and validates the subcommand's configuration, runs it and writes its
/// artifacts. Returns the reports produced.
std::vector<EstimatorReport> run_subcommand(RunContext& ctx);

}  // namespace flowbm::cli
