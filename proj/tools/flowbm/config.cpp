#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "flowbm/errors.hpp"

namespace flowbm::cli {

namespace {

std::string trimmed(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const std::string s = trimmed(text);
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

template <class Int>
bool parse_integer(const std::string& text, Int& out) {
  const std::string s = trimmed(text);
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trimmed(item));
  return parts;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  ExperimentConfig cfg;
  cfg.path_ = path;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    boost::property_tree::ini_parser::read_ini(in, cfg.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  // Second pass for line numbers only; the parser above already validated the syntax.
  in.clear();
  in.seekg(0);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trimmed(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[') {
      section = trimmed(t.substr(1, t.find(']') - 1));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = section.empty() ? trimmed(t.substr(0, eq)) : section + "." + trimmed(t.substr(0, eq));
    cfg.origin_[key] = path + ":" + std::to_string(number);
    cfg.order_.push_back(key);
  }
  for (const auto& [name, sec] : cfg.tree_) {
    if (sec.empty() && !sec.data().empty())
      throw ConfigError(cfg.where(name) + ": key '" + name + "' must be inside a [section]");
  }
  return cfg;
}

void ExperimentConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  const std::string key = trimmed(assignment.substr(0, eq));
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() || key.find('.', dot + 1) != std::string::npos)
    throw ConfigError("--set key must look like section.key, got '" + key + "'");
  tree_.put(boost::property_tree::ptree::path_type(key, '.'), trimmed(assignment.substr(eq + 1)));
  if (!origin_.count(key)) order_.push_back(key);
  origin_[key] = "--set";
}

bool ExperimentConfig::has(const std::string& key) const {
  used_.insert(key);
  return tree_.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '.')).has_value();
}

std::string ExperimentConfig::raw(const std::string& key) const {
  return tree_.get<std::string>(boost::property_tree::ptree::path_type(key, '.'));
}

std::string ExperimentConfig::where(const std::string& key) const {
  const auto it = origin_.find(key);
  return it == origin_.end() ? key : it->second;
}

void ExperimentConfig::bad_value(const std::string& key, const std::string& expected) const {
  throw ConfigError(where(key) + ": " + key + ": expected " + expected + ", got '" + raw(key) + "'");
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  double v = 0.0;
  if (!parse_double(raw(key), v)) bad_value(key, "a number");
  return v;
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  int v = 0;
  if (!parse_integer(raw(key), v)) bad_value(key, "an integer");
  return v;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  std::uint64_t v = 0;
  if (!parse_integer(raw(key), v)) bad_value(key, "a non-negative integer");
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string s = trimmed(raw(key));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  bad_value(key, "true or false");
}

std::vector<double> ExperimentConfig::get_list(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const std::string& part : split(raw(key), ',')) {
    double v = 0.0;
    if (!parse_double(part, v)) bad_value(key, "a comma-separated list of numbers");
    out.push_back(v);
  }
  if (out.empty()) bad_value(key, "a comma-separated list of numbers");
  return out;
}

std::vector<Vec> ExperimentConfig::get_points(const std::string& key, const std::vector<Vec>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<Vec> out;
  for (const std::string& item : split(raw(key), ';')) {
    if (item.empty()) continue;
    const auto parts = split(item, ',');
    if (parts.empty() || parts.size() > 4) bad_value(key, "points 'a, b; c, d'");
    Vec p(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (!parse_double(parts[i], p[static_cast<Eigen::Index>(i)])) bad_value(key, "points 'a, b; c, d'");
    out.push_back(p);
  }
  if (out.empty()) bad_value(key, "at least one point");
  return out;
}

void ExperimentConfig::reject_unused() const {
  for (const std::string& key : order_)
    if (!used_.count(key)) throw ConfigError(where(key) + ": unknown key '" + key + "' for this subcommand");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& key : order_) out.emplace_back(key, raw(key));
  return out;
}

}  // namespace flowbm::cli
