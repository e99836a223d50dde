#include "output.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>

#include "flowbm/errors.hpp"

namespace flowbm::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_output(path);
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir, const EstimatorReport& report) {
  std::vector<std::filesystem::path> written;
  for (const auto& [name, table] : report.tables) {
    const auto path = dir / (report.estimator + "_" + name + ".csv");
    write_csv(path, table.columns, table.rows);
    written.push_back(path);
  }
  if (!report.per_path.empty()) {
    std::vector<std::string> columns{"path"};
    std::size_t n = 0;
    for (const auto& [name, values] : report.per_path) {
      columns.push_back(name);
      n = std::max(n, values.size());
    }
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i].push_back(static_cast<double>(i));
      for (const auto& [name, values] : report.per_path)
        rows[i].push_back(i < values.size() ? values[i] : std::numeric_limits<double>::quiet_NaN());
    }
    const auto path = dir / (report.estimator + "_per_path.csv");
    write_csv(path, columns, rows);
    written.push_back(path);
  }
  return written;
}

std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir, const EstimatorReport& report,
                                               bool csv) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (report.estimator + ".json");
  {
    std::ofstream out = open_output(path);
    out << to_json(report) << '\n';
    if (!out) throw Error("failed writing '" + path.string() + "'");
  }
  std::vector<std::filesystem::path> written{path};
  if (csv) {
    const auto extra = emit_plot_data(dir, report);
    written.insert(written.end(), extra.begin(), extra.end());
  }
  return written;
}

}  // namespace flowbm::cli
