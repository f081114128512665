#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "randns/random.hpp"
#include "randns/spectral.hpp"

namespace randns {

/// One real eigenfunction of -Delta on T^N: the constant 1, or sqrt(2) cos(2 pi k.x),
/// or sqrt(2) sin(2 pi k.x) for k in the half lattice (first nonzero component > 0).
struct RealMode {
  enum class Kind { Constant, Cosine, Sine };
  WaveVector k{};
  Kind kind = Kind::Constant;
  /// Rank in the total order (|k|^2, k, kind) over the whole lattice Z^N. It does
  /// not depend on the truncation, so it doubles as the Gaussian counter.
  std::uint64_t index = 0;
};

/// The real eigenmodes retained by spec, sorted by index.
std::shared_ptr<const std::vector<RealMode>> real_modes(const TorusSpec& spec);

/// Evaluate a real eigenfunction at x in [0,1)^N.
double real_mode_value(const RealMode& mode, const std::array<double, 3>& x);

/// alpha_n in R^N for every retained real mode (row-major: modes x dim).
struct RealModeCoefficients {
  TorusSpec spec;
  std::shared_ptr<const std::vector<RealMode>> modes;
  std::vector<double> alpha;

  std::size_t size() const { return modes->size(); }
  double& at(std::size_t n, int a) { return alpha[n * spec.dim + a]; }
  double at(std::size_t n, int a) const { return alpha[n * spec.dim + a]; }
};

RealModeCoefficients decompose_real_basis(const VectorField& f);
VectorField recompose_real_basis(const RealModeCoefficients& coeffs);

/// f^omega: every real-mode coefficient vector alpha_n scaled by the scalar g_n(omega).
VectorField randomize(const VectorField& f, const RandomizationDraw& draw);

struct EnergyEstimate {
  double mean = 0.0;            // Monte Carlo mean of |f^omega|^2_{H^s}
  double standard_error = 0.0;
  double exact = 0.0;           // |f|^2_{H^s}
  std::size_t samples = 0;
};

/// Monte Carlo estimate of E|f^omega|^2_{H^s} over sample indices 0..samples-1.
EnergyEstimate expected_energy_check(const VectorField& f, double s, std::size_t samples,
                                     std::uint64_t base_seed = 0);

// ---------------------------------------------------------------------------
// Data builders

/// Solenoidal test datum with |alpha_n| proportional to
/// (1 + lambda_n^2)^{-s/2 - N/4} (1 + n)^{-1/2 - epsilon}, each alpha_n pointing along
/// a fixed pseudo-random direction orthogonal to k, scaled to |f|_{H^s} = amplitude.
VectorField canonical_datum(const TorusSpec& spec, double s, double amplitude = 1.0,
                            double epsilon = 0.01);

/// (amplitude sin 2 pi y, 0[, 0]).
VectorField shear_flow(const TorusSpec& spec, double amplitude = 1.0);

/// 2-D: amplitude (-cos 2 pi x sin 2 pi y, sin 2 pi x cos 2 pi y).
/// 3-D: the same vortex in the (x, y) plane, independent of z.
VectorField taylor_green(const TorusSpec& spec, double amplitude = 1.0);

/// Field alpha e(x) for a single real eigenfunction e. alpha must be orthogonal to k
/// for a solenoidal result; no projection is applied.
VectorField single_mode(const TorusSpec& spec, const RealMode& mode,
                        const std::array<double, 3>& alpha);

/// Smooth solenoidal field supported on |k| <= kmax with coefficients decaying like
/// exp(-|k|^2 / 2), deterministic in seed, scaled to L^2 norm = amplitude.
VectorField smooth_datum(const TorusSpec& spec, std::uint64_t seed, int kmax,
                         double amplitude);

}  // namespace randns
