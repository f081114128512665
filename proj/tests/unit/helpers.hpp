#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "randns/spectral.hpp"

namespace testing {

// Hermitian random field with Nyquist plane zeroed; optionally Leray-projected.
inline randns::VectorField random_field(const randns::TorusSpec& spec, unsigned seed,
                                        bool project = true) {
  using namespace randns;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VectorField f(spec);
  for (std::size_t idx = 0; idx < spec.mode_count(); ++idx) {
    const WaveVector k = wave_vector(spec, idx);
    if (is_nyquist(spec, k)) continue;
    WaveVector mk{-k[0], -k[1], -k[2]};
    const std::size_t midx = mode_index(spec, mk);
    if (midx < idx) continue;
    for (int a = 0; a < spec.dim; ++a) {
      if (midx == idx) {
        f.at(a, idx) = {g(rng), 0.0};
      } else {
        const cplx z{g(rng), g(rng)};
        f.at(a, idx) = z;
        f.at(a, midx) = std::conj(z);
      }
    }
  }
  if (project) leray_project_inplace(f);
  return f;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
