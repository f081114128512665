#include "randns/norms.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>

#include "fft_plan.hpp"

namespace randns {

const char* to_string(Regime r) { return r == Regime::Moderate ? "moderate" : "rough"; }

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double cap_exponent(double q) {
  if (std::isinf(q) || q <= kMaxSpaceExponent) return q;
  static std::once_flag warned;
  std::call_once(warned, [] {
    std::cerr << "randns: warning: space exponent above " << kMaxSpaceExponent
              << " evaluated at the cap; grid quadrature is unreliable for higher powers\n";
  });
  return kMaxSpaceExponent;
}

/// (mean of m2^{q/2})^{1/q} over the grid, or sqrt(max m2) for q = infinity.
double power_mean(std::span<const double> m2, double q) {
  if (std::isinf(q)) return std::sqrt(*std::max_element(m2.begin(), m2.end()));
  const double half = 0.5 * q;
  const double rounded = std::round(half);
  double sum = 0.0;
  if (std::abs(half - rounded) < 1e-12 && rounded >= 1.0 && rounded <= 32.0) {
    const int e = static_cast<int>(rounded);
    for (double v : m2) {
      double p = v;
      for (int i = 1; i < e; ++i) p *= v;
      sum += p;
    }
  } else {
    for (double v : m2) sum += std::pow(v, half);
  }
  return std::pow(sum / static_cast<double>(m2.size()), 1.0 / q);
}

std::vector<double> squared_magnitude(const PhysicalField& u) {
  const std::size_t n = u.spec.grid_count();
  std::vector<double> m2(n, 0.0);
  for (int a = 0; a < u.spec.dim; ++a) {
    auto c = u.component(a);
    for (std::size_t i = 0; i < n; ++i) m2[i] += c[i] * c[i];
  }
  return m2;
}

void check_exponent(double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("Lebesgue exponent must satisfy q >= 1");
}

}  // namespace

ParameterSet admissible_parameters(int dim, double s, std::optional<double> m) {
  if (dim != 2 && dim != 3)
    throw ParameterError("dimension N = " + std::to_string(dim) + " violates N in {2, 3}");
  if (!(s > -1.0 && s < 0.0))
    throw ParameterError("Sobolev index s = " + fmt(s) + " violates -1 < s < 0");

  const double four_minus_n = 4.0 - dim;
  const double m_lo = 8.0 / four_minus_n;
  const double m_hi = 16.0 / four_minus_n;
  ParameterSet p;
  p.dim = dim;
  p.s = s;
  p.m = m.value_or(m_hi);
  if (!(p.m > m_lo && p.m <= m_hi))
    throw ParameterError("m = " + fmt(p.m) + " violates 8/(4-N) < m <= 16/(4-N), i.e. (" +
                         fmt(m_lo) + ", " + fmt(m_hi) + "] for N = " + std::to_string(dim));
  p.delta = four_minus_n / 8.0 - 1.0 / p.m;
  if (!(p.delta > 0.0 && p.delta <= four_minus_n / 16.0 + 1e-15))
    throw ParameterError("delta = " + fmt(p.delta) + " violates 0 < delta <= (4-N)/16");

  if (s > -1.0 + dim / 4.0) {
    p.regime = Regime::Moderate;
    p.rho = std::min(1.0 / p.m, s / 2.0 + four_minus_n / 8.0);
    p.p_time = 8.0 / four_minus_n;
    p.q_space = 4.0;
  } else {
    p.regime = Regime::Rough;
    p.rho = (1.0 + s) / 4.0;
    p.p_time = 4.0 / (1.0 - s);
    p.q_space = 2.0 * dim / (1.0 + s);
  }
  return p;
}

std::vector<double> lebesgue_profile(const Trajectory& u, double q) {
  check_exponent(q);
  q = cap_exponent(q);
  std::vector<double> out;
  out.reserve(u.states.size());
  for (const auto& state : u.states) out.push_back(power_mean(squared_magnitude(to_physical(state)), q));
  return out;
}

std::vector<double> sobolev_profile(const Trajectory& u, double s) {
  std::vector<double> out;
  out.reserve(u.states.size());
  for (const auto& state : u.states) out.push_back(sobolev_norm(state, s));
  return out;
}

std::vector<std::vector<double>> heat_lebesgue_profiles(const VectorField& f,
                                                        const TimeGrid& grid,
                                                        std::span<const double> qs) {
  grid.validate();
  std::vector<double> capped;
  for (double q : qs) {
    check_exponent(q);
    capped.push_back(cap_exponent(q));
  }
  const auto& spec = f.spec();
  auto& ws = detail::FftWorkspace::local(spec.dim, spec.grid);
  const auto layout = detail::SpectralLayout::get(spec);
  const auto& slots = layout->scatter;

  // Eigenvalue per scattered slot (the k_last >= 0 half of the box).
  std::vector<double> eig(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i)
    eig[i] = eigenvalue(wave_vector(spec, slots[i].mode));

  const std::size_t npts = spec.grid_count();
  thread_local std::vector<double> m2;
  m2.assign(npts, 0.0);
  std::vector<double> decay(slots.size());
  std::vector<std::vector<double>> out(qs.size(), std::vector<double>(grid.nodes()));
  for (int j = 0; j < grid.nodes(); ++j) {
    const double t = grid.node(j);
    for (std::size_t i = 0; i < slots.size(); ++i) decay[i] = std::exp(-eig[i] * t);
    std::fill(m2.begin(), m2.end(), 0.0);
    for (int a = 0; a < spec.dim; ++a) {
      fftw_complex* half = ws.half();
      std::fill_n(&half[0][0], 2 * ws.half_size(), 0.0);
      auto comp = f.component(a);
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const cplx z = comp[slots[i].mode];
        half[slots[i].half][0] = z.real() * decay[i];
        half[slots[i].half][1] = z.imag() * decay[i];
      }
      ws.backward();
      const double* r = ws.real();
      for (std::size_t p = 0; p < npts; ++p) m2[p] += r[p] * r[p];
    }
    for (std::size_t iq = 0; iq < capped.size(); ++iq) out[iq][j] = power_mean(m2, capped[iq]);
  }
  return out;
}

double weighted_time_norm(std::span<const double> profile, const TimeGrid& grid, double m,
                          double delta) {
  if (!(m >= 1.0)) throw std::invalid_argument("time exponent must satisfy m >= 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("time weight must satisfy delta >= 0");
  if (profile.size() != static_cast<std::size_t>(grid.nodes()))
    throw std::invalid_argument("profile length does not match the time grid");
  const double h = grid.step();
  double sum = 0.0;
  for (int j = 0; j < grid.nodes(); ++j) {
    const double t = grid.node(j);
    const double w = (j == 0 || j == grid.steps) ? 0.5 : 1.0;
    const double weight = delta == 0.0 ? 1.0 : std::pow(t, delta);
    sum += w * std::pow(weight * profile[j], m);
  }
  return std::pow(h * sum, 1.0 / m);
}

double time_norm(std::span<const double> profile, const TimeGrid& grid, double p) {
  if (std::isinf(p)) {
    if (profile.size() != static_cast<std::size_t>(grid.nodes()))
      throw std::invalid_argument("profile length does not match the time grid");
    return *std::max_element(profile.begin(), profile.end());
  }
  return weighted_time_norm(profile, grid, p, 0.0);
}

double weighted_space_time_norm(const Trajectory& u, double m, double delta, double q) {
  return weighted_time_norm(lebesgue_profile(u, q), u.grid, m, delta);
}

double space_time_norm(const Trajectory& u, double p, double q) {
  return time_norm(lebesgue_profile(u, q), u.grid, p);
}

XNormParts x_norm_parts(const Trajectory& u, const ParameterSet& params) {
  if (params.regime != Regime::Moderate)
    throw std::invalid_argument("the X norm belongs to the moderate regime (-1 + N/4 < s < 0)");
  const auto l4 = lebesgue_profile(u, 4.0);
  const auto sob = sobolev_profile(u, (params.dim - 2) / 2.0);
  XNormParts parts;
  parts.sup_sobolev = time_norm(sob, u.grid, std::numeric_limits<double>::infinity());
  parts.weighted = weighted_time_norm(l4, u.grid, params.m, params.delta);
  parts.strichartz = time_norm(l4, u.grid, 8.0 / (4.0 - params.dim));
  return parts;
}

double x_norm(const Trajectory& u, const ParameterSet& params) {
  return x_norm_parts(u, params).total();
}

double y_norm(const Trajectory& u, const ParameterSet& params) {
  if (params.regime != Regime::Rough)
    throw std::invalid_argument("the Y norm belongs to the rough regime (-1 < s <= -1 + N/4)");
  return space_time_norm(u, 4.0 / (1.0 - params.s), 2.0 * params.dim / (1.0 + params.s));
}

double solution_norm(const Trajectory& u, const ParameterSet& params) {
  return params.regime == Regime::Moderate ? x_norm(u, params) : y_norm(u, params);
}

double event_norm(const Trajectory& u_lin, const ParameterSet& params) {
  if (params.regime == Regime::Rough) return y_norm(u_lin, params);
  const auto l4 = lebesgue_profile(u_lin, 4.0);
  return weighted_time_norm(l4, u_lin.grid, params.m, params.delta) +
         time_norm(l4, u_lin.grid, 8.0 / (4.0 - params.dim));
}

}  // namespace randns
