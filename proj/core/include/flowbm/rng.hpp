#pragma once

#include <array>
#include <cstdint>

#include "flowbm/types.hpp"

namespace flowbm {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter apply(Counter ctr, Key key);
};

/// Maps two 32-bit words to a double in the open interval (0, 1) with 53 bits.
inline double to_open_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Gaussian noise for one path. Every draw is a pure function of
/// (master seed, path index, step, block), so paths can be generated in any
/// order and on any thread.
class NoiseStream {
 public:
  /// Step value reserved for draws outside the time-stepping loop.
  static constexpr std::uint32_t kAuxStep = 0xFFFFFFFFu;

  NoiseStream(std::uint64_t master_seed, std::uint64_t path_index);

  /// Fills out[0..n) with independent standard normals for `step`.
  void normals(std::uint32_t step, int n, double* out) const;
  /// n i.i.d. N(0, dt) increments for `step`.
  Vec increment(std::uint32_t step, int n, double dt) const;
  /// Standard normals from the auxiliary counter range, e.g. for start points.
  void aux_normals(std::uint32_t block, int n, double* out) const;
  /// Uniform in (0, 1) from the auxiliary counter range.
  double aux_uniform(std::uint32_t block) const;

 private:
  void fill(std::uint32_t step, std::uint32_t block0, int n, double* out) const;

  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
};

}  // namespace flowbm
