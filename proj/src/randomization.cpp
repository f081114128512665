#include "randns/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace randns {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Keys for the deterministic directions used by the data builders; distinct from any
// user seed stream because they use their own sample_index values.
constexpr std::uint64_t kDirectionSeed = 0x6A09E667F3BCC908ull;

bool positive_half(const WaveVector& k) {
  for (int c : k) {
    if (c > 0) return true;
    if (c < 0) return false;
  }
  return false;
}

WaveVector negate(const WaveVector& k) { return {-k[0], -k[1], -k[2]}; }

std::vector<RealMode> enumerate_modes(const TorusSpec& spec) {
  const int kmax = spec.kmax() - 1;  // Nyquist excluded
  const long bound = static_cast<long>(spec.dim) * kmax * kmax;
  const int radius = static_cast<int>(std::floor(std::sqrt(static_cast<double>(bound))));

  // Every half-lattice vector with |k|^2 <= bound, so ranks agree with the infinite order.
  std::vector<WaveVector> lattice;
  const int r1 = spec.dim >= 3 ? radius : 0;
  for (int a = -radius; a <= radius; ++a)
    for (int b = -radius; b <= radius; ++b)
      for (int c = -r1; c <= r1; ++c) {
        WaveVector k{a, b, c};
        if (norm_sq(k) <= bound && positive_half(k)) lattice.push_back(k);
      }
  std::sort(lattice.begin(), lattice.end(), [](const WaveVector& x, const WaveVector& y) {
    const long nx = norm_sq(x), ny = norm_sq(y);
    if (nx != ny) return nx < ny;
    return x < y;
  });

  std::vector<RealMode> modes;
  modes.push_back({WaveVector{0, 0, 0}, RealMode::Kind::Constant, 0});
  std::uint64_t rank = 1;
  for (const auto& k : lattice) {
    bool inside = true;
    for (int i = 0; i < spec.dim; ++i) inside = inside && std::abs(k[i]) <= kmax;
    if (inside) {
      modes.push_back({k, RealMode::Kind::Cosine, rank});
      modes.push_back({k, RealMode::Kind::Sine, rank + 1});
    }
    rank += 2;
  }
  return modes;
}

}  // namespace

std::shared_ptr<const std::vector<RealMode>> real_modes(const TorusSpec& spec) {
  static std::mutex m;
  static std::map<std::pair<int, int>, std::shared_ptr<const std::vector<RealMode>>> cache;
  spec.validate();
  std::lock_guard lock(m);
  auto& slot = cache[{spec.dim, spec.modes}];
  if (!slot) slot = std::make_shared<const std::vector<RealMode>>(enumerate_modes(spec));
  return slot;
}

double real_mode_value(const RealMode& mode, const std::array<double, 3>& x) {
  const double phase = kTwoPi * (mode.k[0] * x[0] + mode.k[1] * x[1] + mode.k[2] * x[2]);
  switch (mode.kind) {
    case RealMode::Kind::Constant: return 1.0;
    case RealMode::Kind::Cosine: return kSqrt2 * std::cos(phase);
    case RealMode::Kind::Sine: return kSqrt2 * std::sin(phase);
  }
  return 0.0;
}

// With u(k) = a + ib and u(-k) = conj(u(k)),
//   u(k) e^{i theta} + u(-k) e^{-i theta} = 2a cos(theta) - 2b sin(theta),
// so alpha_cos = sqrt2 a and alpha_sin = -sqrt2 b.
RealModeCoefficients decompose_real_basis(const VectorField& f) {
  const auto& spec = f.spec();
  RealModeCoefficients out{spec, real_modes(spec), {}};
  out.alpha.assign(out.modes->size() * spec.dim, 0.0);
  for (std::size_t n = 0; n < out.modes->size(); ++n) {
    const RealMode& mode = (*out.modes)[n];
    for (int a = 0; a < spec.dim; ++a) {
      const cplx z = f.at(a, mode.k);
      switch (mode.kind) {
        case RealMode::Kind::Constant: out.at(n, a) = z.real(); break;
        case RealMode::Kind::Cosine: out.at(n, a) = kSqrt2 * z.real(); break;
        case RealMode::Kind::Sine: out.at(n, a) = -kSqrt2 * z.imag(); break;
      }
    }
  }
  return out;
}

VectorField recompose_real_basis(const RealModeCoefficients& coeffs) {
  const auto& spec = coeffs.spec;
  VectorField f(spec);
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const RealMode& mode = (*coeffs.modes)[n];
    for (int a = 0; a < spec.dim; ++a) {
      const double alpha = coeffs.at(n, a);
      switch (mode.kind) {
        case RealMode::Kind::Constant: f.at(a, mode.k) += alpha; break;
        case RealMode::Kind::Cosine:
          f.at(a, mode.k) += kInvSqrt2 * alpha;
          f.at(a, negate(mode.k)) += kInvSqrt2 * alpha;
          break;
        case RealMode::Kind::Sine:
          f.at(a, mode.k) += cplx{0.0, -kInvSqrt2 * alpha};
          f.at(a, negate(mode.k)) += cplx{0.0, kInvSqrt2 * alpha};
          break;
      }
    }
  }
  return f;
}

VectorField randomize(const VectorField& f, const RandomizationDraw& draw) {
  const auto& spec = f.spec();
  const auto modes = real_modes(spec);
  VectorField out(spec);
  // Walk cos/sin pairs directly: u'(k) = g_cos Re u(k) + i g_sin Im u(k).
  for (std::size_t n = 0; n < modes->size(); ++n) {
    const RealMode& mode = (*modes)[n];
    if (mode.kind == RealMode::Kind::Constant) {
      const double g = draw.gaussian(mode.index);
      for (int a = 0; a < spec.dim; ++a) out.at(a, mode.k) = g * f.at(a, mode.k).real();
      continue;
    }
    if (mode.kind != RealMode::Kind::Cosine) continue;
    const double gc = draw.gaussian(mode.index);
    const double gs = draw.gaussian((*modes)[n + 1].index);
    const std::size_t plus = mode_index(spec, mode.k);
    const std::size_t minus = mode_index(spec, negate(mode.k));
    for (int a = 0; a < spec.dim; ++a) {
      const cplx z = f.at(a, plus);
      const cplx w{gc * z.real(), gs * z.imag()};
      out.at(a, plus) = w;
      out.at(a, minus) = std::conj(w);
    }
  }
  return out;
}

EnergyEstimate expected_energy_check(const VectorField& f, double s, std::size_t samples,
                                     std::uint64_t base_seed) {
  if (samples < 2) throw std::invalid_argument("expected_energy_check needs >= 2 samples");
  EnergyEstimate est;
  est.samples = samples;
  est.exact = std::pow(sobolev_norm(f, s), 2);
  // Welford accumulation.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double e = std::pow(sobolev_norm(randomize(f, {base_seed, i}), s), 2);
    const double delta = e - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (e - mean);
  }
  est.mean = mean;
  est.standard_error = std::sqrt(m2 / static_cast<double>(samples - 1) / samples);
  return est;
}

// ---------------------------------------------------------------------------
// Data builders

namespace {

std::array<double, 3> direction_orthogonal_to(const RealMode& mode, int dim) {
  std::array<double, 3> d{};
  // Resample (with a bumped counter) in the measure-zero case of a vector parallel to k.
  for (std::uint64_t attempt = 0;; ++attempt) {
    for (int a = 0; a < dim; ++a)
      d[a] = RandomizationDraw{kDirectionSeed, static_cast<std::uint64_t>(a) + 8 * attempt}
                 .gaussian(mode.index);
    const double k2 = static_cast<double>(norm_sq(mode.k));
    if (k2 > 0.0) {
      double dot = 0.0;
      for (int a = 0; a < dim; ++a) dot += d[a] * mode.k[a];
      for (int a = 0; a < dim; ++a) d[a] -= mode.k[a] * dot / k2;
    }
    double len = 0.0;
    for (int a = 0; a < dim; ++a) len += d[a] * d[a];
    len = std::sqrt(len);
    if (len > 1e-8) {
      for (int a = 0; a < dim; ++a) d[a] /= len;
      return d;
    }
  }
}

VectorField scaled_to(VectorField f, double current, double target) {
  if (current > 0.0) f *= target / current;
  return f;
}

}  // namespace

VectorField canonical_datum(const TorusSpec& spec, double s, double amplitude,
                            double epsilon) {
  RealModeCoefficients coeffs{spec, real_modes(spec), {}};
  coeffs.alpha.assign(coeffs.size() * spec.dim, 0.0);
  const double n_over_4 = spec.dim / 4.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const RealMode& mode = (*coeffs.modes)[n];
    const double magnitude = std::pow(1.0 + eigenvalue(mode.k), -s / 2.0 - n_over_4) *
                             std::pow(1.0 + static_cast<double>(mode.index), -0.5 - epsilon);
    const auto d = direction_orthogonal_to(mode, spec.dim);
    for (int a = 0; a < spec.dim; ++a) coeffs.at(n, a) = magnitude * d[a];
  }
  VectorField f = recompose_real_basis(coeffs);
  leray_project_inplace(f);
  const double norm = sobolev_norm(f, s);
  return scaled_to(std::move(f), norm, amplitude);
}

VectorField shear_flow(const TorusSpec& spec, double amplitude) {
  // sin(2 pi y) = (e^{2 pi i y} - e^{-2 pi i y}) / 2i
  VectorField f(spec);
  f.at(0, WaveVector{0, 1, 0}) = cplx{0.0, -0.5 * amplitude};
  f.at(0, WaveVector{0, -1, 0}) = cplx{0.0, 0.5 * amplitude};
  return f;
}

VectorField taylor_green(const TorusSpec& spec, double amplitude) {
  // -cos(2 pi x) sin(2 pi y) = -(1/4i) sum_{sx,sy = +-1} sy e^{2 pi i (sx x + sy y)}
  //  sin(2 pi x) cos(2 pi y) =  (1/4i) sum_{sx,sy = +-1} sx e^{2 pi i (sx x + sy y)}
  VectorField f(spec);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      const WaveVector k{sx, sy, 0};
      f.at(0, k) = cplx{0.0, 0.25 * amplitude * sy};
      f.at(1, k) = cplx{0.0, -0.25 * amplitude * sx};
    }
  return f;
}

VectorField single_mode(const TorusSpec& spec, const RealMode& mode,
                        const std::array<double, 3>& alpha) {
  RealModeCoefficients coeffs{spec, real_modes(spec), {}};
  coeffs.alpha.assign(coeffs.size() * spec.dim, 0.0);
  const auto& modes = *coeffs.modes;
  auto it = std::find_if(modes.begin(), modes.end(), [&](const RealMode& m) {
    return m.k == mode.k && m.kind == mode.kind;
  });
  if (it == modes.end()) throw std::invalid_argument("real mode is not retained by the torus spec");
  const std::size_t n = static_cast<std::size_t>(it - modes.begin());
  for (int a = 0; a < spec.dim; ++a) coeffs.at(n, a) = alpha[a];
  return recompose_real_basis(coeffs);
}

VectorField smooth_datum(const TorusSpec& spec, std::uint64_t seed, int kmax,
                         double amplitude) {
  RealModeCoefficients coeffs{spec, real_modes(spec), {}};
  coeffs.alpha.assign(coeffs.size() * spec.dim, 0.0);
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const RealMode& mode = (*coeffs.modes)[n];
    const long k2 = norm_sq(mode.k);
    if (k2 == 0 || k2 > static_cast<long>(kmax) * kmax) continue;
    const double decay = std::exp(-0.5 * static_cast<double>(k2));
    for (int a = 0; a < spec.dim; ++a)
      coeffs.at(n, a) = decay * RandomizationDraw{seed, static_cast<std::uint64_t>(a)}.gaussian(mode.index);
  }
  VectorField f = recompose_real_basis(coeffs);
  leray_project_inplace(f);
  const double norm = std::sqrt(energy(f));
  return scaled_to(std::move(f), norm, amplitude);
}

}  // namespace randns
