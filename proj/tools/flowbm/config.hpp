#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "flowbm/types.hpp"

namespace flowbm::cli {

/// Sectioned key-value experiment file plus --set overrides. Every lookup
/// records the key, so unknown keys can be reported after the run is set up
/// and before any compute.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  /// Parses an INI file. Throws ConfigError with file:line on syntax errors.
  static ExperimentConfig load(const std::string& path);

  /// Applies "section.key=value".
  void set(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated reals.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
  /// Points "a, b; c, d; ...".
  std::vector<Vec> get_points(const std::string& key, const std::vector<Vec>& fallback) const;

  /// Throws ConfigError naming the first key that was never read.
  void reject_unused() const;

  /// "file:line" (or "--set") of a key, for diagnostics.
  std::string where(const std::string& key) const;
  /// All entries in file order, overrides last.
  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  std::string raw(const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& key, const std::string& expected) const;

  boost::property_tree::ptree tree_;
  std::string path_;
  std::map<std::string, std::string> origin_;
  std::vector<std::string> order_;
  mutable std::set<std::string> used_;
};

}  // namespace flowbm::cli
