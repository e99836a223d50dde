#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowbm/estimators.hpp"

namespace flowbm::cli {

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// Writes <dir>/<estimator>.json, one <estimator>_<table>.csv per table and
/// <estimator>_per_path.csv when per-path data is present. Returns the paths written.
std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir, const EstimatorReport& report,
                                               bool csv);

/// Long-format CSVs of a report's tables and per-path data.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir, const EstimatorReport& report);

}  // namespace flowbm::cli
