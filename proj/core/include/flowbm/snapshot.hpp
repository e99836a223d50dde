#pragma once

#include <string>
#include <vector>

#include "flowbm/spectral.hpp"

namespace flowbm {

/// One named space-time field: n_times grids of size grid_n x grid_n.
struct NamedField {
  std::string name;
  std::vector<Field2D> frames;
};

/// Contents of a snapshot container.
struct SnapshotData {
  int grid_n = 0;
  std::vector<double> times;
  std::vector<NamedField> fields;

  const NamedField& field(const std::string& name) const;
};

inline constexpr unsigned kSnapshotVersion = 1;

/// Binary layout: magic "FLOWBMSN", u32 version, u32 grid_n, u32 n_times,
/// u32 n_fields, f64 times[n_times], then for each field u32 name length,
/// name bytes and n_times * grid_n^2 row-major f64 values.
void write_snapshot(const std::string& path, const SnapshotData& data);
/// Throws SnapshotError on a bad magic, version or shape and on truncation.
SnapshotData read_snapshot(const std::string& path);

}  // namespace flowbm
