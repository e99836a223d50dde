#include "flowbm/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "flowbm/errors.hpp"

namespace flowbm {

namespace {

constexpr char kMagic[8] = {'F', 'L', 'O', 'W', 'B', 'M', 'S', 'N'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64s(std::ofstream& out, const double* v, std::size_t count) {
  out.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(count * sizeof(double)));
}

void get_bytes(std::ifstream& in, char* dst, std::size_t count, const char* what) {
  in.read(dst, static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count)
    throw SnapshotError(std::string("snapshot truncated while reading ") + what);
}

std::uint32_t get_u32(std::ifstream& in, const char* what) {
  std::uint32_t v = 0;
  get_bytes(in, reinterpret_cast<char*>(&v), sizeof v, what);
  return v;
}

}  // namespace

const NamedField& SnapshotData::field(const std::string& name) const {
  for (const NamedField& f : fields)
    if (f.name == name) return f;
  throw SnapshotError("snapshot has no field named '" + name + "'");
}

void write_snapshot(const std::string& path, const SnapshotData& data) {
  for (const NamedField& f : data.fields) {
    if (f.frames.size() != data.times.size())
      throw SnapshotError("field '" + f.name + "' has a frame count different from n_times");
    for (const Field2D& frame : f.frames)
      if (frame.n != data.grid_n)
        throw SnapshotError("field '" + f.name + "' has a grid different from grid_n");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(data.grid_n));
  put_u32(out, static_cast<std::uint32_t>(data.times.size()));
  put_u32(out, static_cast<std::uint32_t>(data.fields.size()));
  put_f64s(out, data.times.data(), data.times.size());
  for (const NamedField& f : data.fields) {
    put_u32(out, static_cast<std::uint32_t>(f.name.size()));
    out.write(f.name.data(), static_cast<std::streamsize>(f.name.size()));
    for (const Field2D& frame : f.frames) put_f64s(out, frame.data.data(), frame.data.size());
  }
  if (!out) throw SnapshotError("write to '" + path + "' failed");
}

SnapshotData read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open snapshot '" + path + "'");
  char magic[sizeof kMagic];
  get_bytes(in, magic, sizeof magic, "magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw SnapshotError("'" + path + "' is not a snapshot file (bad magic)");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kSnapshotVersion)
    throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  SnapshotData data;
  const std::uint32_t grid_n = get_u32(in, "grid_n");
  const std::uint32_t n_times = get_u32(in, "n_times");
  const std::uint32_t n_fields = get_u32(in, "n_fields");
  if (grid_n < 2 || grid_n > 4096) throw SnapshotError("implausible grid_n in snapshot header");
  if (n_times < 1 || n_times > 1000000) throw SnapshotError("implausible n_times in snapshot header");
  if (n_fields > 64) throw SnapshotError("implausible n_fields in snapshot header");
  data.grid_n = static_cast<int>(grid_n);
  data.times.resize(n_times);
  get_bytes(in, reinterpret_cast<char*>(data.times.data()), n_times * sizeof(double), "t_list");
  for (std::uint32_t k = 1; k < n_times; ++k)
    if (!(data.times[k] > data.times[k - 1]))
      throw SnapshotError("snapshot times are not increasing");
  for (std::uint32_t f = 0; f < n_fields; ++f) {
    NamedField field;
    const std::uint32_t len = get_u32(in, "field name length");
    if (len > 256) throw SnapshotError("implausible field name length");
    field.name.resize(len);
    get_bytes(in, field.name.data(), len, "field name");
    field.frames.reserve(n_times);
    for (std::uint32_t k = 0; k < n_times; ++k) {
      Field2D frame(data.grid_n);
      get_bytes(in, reinterpret_cast<char*>(frame.data.data()), frame.data.size() * sizeof(double),
                field.name.c_str());
      field.frames.push_back(std::move(frame));
    }
    data.fields.push_back(std::move(field));
  }
  return data;
}

}  // namespace flowbm
