#include "randns/random.hpp"

#include <cmath>

namespace randns {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double open_unit(std::uint64_t bits) {
  // (bits >> 12) in [0, 2^52); the half-step offset keeps the result strictly inside
  // (0, 1) and exactly representable (a 53-bit version would round up to 1).
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double RandomizationDraw::gaussian(std::uint64_t n) const {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32),
      static_cast<std::uint32_t>(sample_index), static_cast<std::uint32_t>(sample_index >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(base_seed),
                                         static_cast<std::uint32_t>(base_seed >> 32)};
  const auto out = philox4x32(ctr, key);
  const double u1 = open_unit((static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
  const double u2 = open_unit((static_cast<std::uint64_t>(out[2]) << 32) | out[3]);
  // Box-Muller, cosine branch.
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
}

}  // namespace randns
