#include "flowbm/rng.hpp"

#include <cmath>
#include <numbers>

namespace flowbm {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t path_index)
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      path_lo_(static_cast<std::uint32_t>(path_index)),
      path_hi_(static_cast<std::uint32_t>(path_index >> 32)) {}

void NoiseStream::fill(std::uint32_t step, std::uint32_t block0, int n, double* out) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0, block = static_cast<int>(block0); k < n; k += 2, ++block) {
    const auto r = Philox4x32::apply({step, static_cast<std::uint32_t>(block), path_lo_, path_hi_},
                                     key_);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    out[k] = rad * std::cos(two_pi * u2);
    if (k + 1 < n) out[k + 1] = rad * std::sin(two_pi * u2);
  }
}

void NoiseStream::normals(std::uint32_t step, int n, double* out) const { fill(step, 0, n, out); }

Vec NoiseStream::increment(std::uint32_t step, int n, double dt) const {
  Vec v(n);
  fill(step, 0, n, v.data());
  return std::sqrt(dt) * v;
}

void NoiseStream::aux_normals(std::uint32_t block, int n, double* out) const {
  fill(kAuxStep, block, n, out);
}

double NoiseStream::aux_uniform(std::uint32_t block) const {
  const auto r = Philox4x32::apply({kAuxStep, block | 0x80000000u, path_lo_, path_hi_}, key_);
  return to_open_unit(r[0], r[1]);
}

}  // namespace flowbm
