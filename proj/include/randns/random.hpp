#pragma once

#include <array>
#include <cstdint>

namespace randns {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless: the
/// output is a pure function of (key, counter).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// One draw of the randomization: key for the whole family (g_n)_{n>=0}.
struct RandomizationDraw {
  std::uint64_t base_seed = 0;
  std::uint64_t sample_index = 0;

  /// Standard normal g_n, a deterministic function of (base_seed, sample_index, n).
  double gaussian(std::uint64_t n) const;

  friend bool operator==(const RandomizationDraw&, const RandomizationDraw&) = default;
};

/// Uniform on (0, 1) from the top 52 bits of a 64-bit word.
double open_unit(std::uint64_t bits);

}  // namespace randns
