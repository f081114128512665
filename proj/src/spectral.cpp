#include "randns/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "fft_plan.hpp"

namespace randns {

namespace {

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// TorusSpec

TorusSpec TorusSpec::make(int dim, int modes, int grid) {
  TorusSpec spec{dim, modes, grid > 0 ? grid : 2 * modes};
  spec.validate();
  return spec;
}

void TorusSpec::validate() const {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("torus dimension must be 2 or 3, got " + std::to_string(dim));
  if (modes < 4 || modes % 2 != 0)
    throw std::invalid_argument("modes per axis must be even and >= 4, got " +
                                std::to_string(modes));
  if (grid < modes)
    throw std::invalid_argument("grid points per axis (" + std::to_string(grid) +
                                ") must be >= modes per axis (" + std::to_string(modes) + ")");
}

std::size_t TorusSpec::mode_count() const { return ipow(modes, dim); }
std::size_t TorusSpec::grid_count() const { return ipow(grid, dim); }

double eigenvalue(const WaveVector& k) {
  return 4.0 * kPi * kPi * static_cast<double>(norm_sq(k));
}

const std::vector<double>& eigenvalue_table(const TorusSpec& spec) {
  static std::mutex m;
  static std::map<std::pair<int, int>, std::unique_ptr<const std::vector<double>>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[{spec.dim, spec.modes}];
  if (!slot) {
    auto table = std::make_unique<std::vector<double>>(spec.mode_count());
    for (std::size_t i = 0; i < table->size(); ++i) (*table)[i] = eigenvalue(wave_vector(spec, i));
    slot = std::move(table);
  }
  return *slot;
}

std::size_t mode_index(const TorusSpec& spec, const WaveVector& k) {
  std::size_t idx = 0;
  for (int i = 0; i < spec.dim; ++i)
    idx = idx * spec.modes + static_cast<std::size_t>(k[i] - spec.kmin());
  return idx;
}

WaveVector wave_vector(const TorusSpec& spec, std::size_t index) {
  WaveVector k{0, 0, 0};
  for (int i = spec.dim - 1; i >= 0; --i) {
    k[i] = static_cast<int>(index % spec.modes) + spec.kmin();
    index /= spec.modes;
  }
  return k;
}

bool is_nyquist(const TorusSpec& spec, const WaveVector& k) {
  for (int i = 0; i < spec.dim; ++i)
    if (k[i] == spec.kmax()) return true;
  return false;
}

bool in_box(const TorusSpec& spec, const WaveVector& k) {
  for (int i = 0; i < spec.dim; ++i)
    if (k[i] < spec.kmin() || k[i] > spec.kmax()) return false;
  for (int i = spec.dim; i < 3; ++i)
    if (k[i] != 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(TorusSpec spec) : spec_(spec) {
  spec_.validate();
  modes_ = spec_.mode_count();
  coeffs_.assign(modes_ * spec_.dim, cplx{});
}

VectorField& VectorField::operator+=(const VectorField& other) {
  if (!(spec_ == other.spec_)) throw std::invalid_argument("field spec mismatch in +=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  if (!(spec_ == other.spec_)) throw std::invalid_argument("field spec mismatch in -=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

VectorField& VectorField::operator*=(double c) {
  for (auto& z : coeffs_) z *= c;
  return *this;
}

// ---------------------------------------------------------------------------
// FFT plumbing

namespace detail {

FftWorkspace::FftWorkspace(int dim, int grid) {
  real_size_ = ipow(grid, dim);
  half_size_ = ipow(grid, dim - 1) * static_cast<std::size_t>(grid / 2 + 1);
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(real_size_);
  half_ = fftw_alloc_complex(half_size_);
  int n[3] = {grid, grid, grid};
  c2r_ = fftw_plan_dft_c2r(dim, n, half_, real_, FFTW_ESTIMATE);
  r2c_ = fftw_plan_dft_r2c(dim, n, real_, half_, FFTW_ESTIMATE);
}

FftWorkspace::~FftWorkspace() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(c2r_);
  fftw_destroy_plan(r2c_);
  fftw_free(real_);
  fftw_free(half_);
}

FftWorkspace& FftWorkspace::local(int dim, int grid) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftWorkspace>> cache;
  auto& slot = cache[{dim, grid}];
  if (!slot) slot = std::make_unique<FftWorkspace>(dim, grid);
  return *slot;
}

std::shared_ptr<const SpectralLayout> SpectralLayout::get(const TorusSpec& spec) {
  static std::mutex m;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const SpectralLayout>> cache;
  std::lock_guard lock(m);
  auto key = std::make_tuple(spec.dim, spec.modes, spec.grid);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto layout = std::make_shared<SpectralLayout>();
  const int G = spec.grid;
  const int last = spec.dim - 1;
  auto half_index = [&](const WaveVector& k) {
    std::size_t idx = 0;
    for (int i = 0; i < last; ++i) idx = idx * G + static_cast<std::size_t>(((k[i] % G) + G) % G);
    return idx * static_cast<std::size_t>(G / 2 + 1) + static_cast<std::size_t>(k[last]);
  };
  layout->wavevectors.reserve(spec.mode_count());
  for (std::size_t idx = 0; idx < spec.mode_count(); ++idx) {
    WaveVector k = wave_vector(spec, idx);
    layout->wavevectors.push_back(k);
    if (is_nyquist(spec, k)) continue;
    if (k[last] >= 0) {
      SpectralLayout::Slot slot{idx, half_index(k), false};
      layout->scatter.push_back(slot);
      layout->gather.push_back(slot);
    } else {
      WaveVector mk{-k[0], -k[1], -k[2]};
      layout->gather.push_back({idx, half_index(mk), true});
    }
  }
  cache.emplace(key, layout);
  return layout;
}

void component_to_grid(const VectorField& f, int a, FftWorkspace& ws,
                       const SpectralLayout& layout) {
  fftw_complex* half = ws.half();
  std::fill_n(&half[0][0], 2 * ws.half_size(), 0.0);
  auto comp = f.component(a);
  for (const auto& slot : layout.scatter) {
    half[slot.half][0] = comp[slot.mode].real();
    half[slot.half][1] = comp[slot.mode].imag();
  }
  ws.backward();
}

void grid_to_modes(FftWorkspace& ws, const SpectralLayout& layout, std::span<cplx> comp) {
  ws.forward();
  const double scale = 1.0 / static_cast<double>(ws.real_size());
  const fftw_complex* half = ws.half();
  std::fill(comp.begin(), comp.end(), cplx{});
  for (const auto& slot : layout.gather) {
    const double re = half[slot.half][0] * scale;
    const double im = half[slot.half][1] * scale;
    comp[slot.mode] = slot.conjugate ? cplx{re, -im} : cplx{re, im};
  }
}

}  // namespace detail

PhysicalField to_physical(const VectorField& f) {
  const auto& spec = f.spec();
  PhysicalField out{spec, std::vector<double>(spec.grid_count() * spec.dim)};
  auto& ws = detail::FftWorkspace::local(spec.dim, spec.grid);
  auto layout = detail::SpectralLayout::get(spec);
  for (int a = 0; a < spec.dim; ++a) {
    detail::component_to_grid(f, a, ws, *layout);
    std::copy_n(ws.real(), ws.real_size(), out.component(a).begin());
  }
  return out;
}

VectorField to_spectral(const PhysicalField& samples) {
  const auto& spec = samples.spec;
  spec.validate();
  if (samples.values.size() != spec.grid_count() * spec.dim)
    throw std::invalid_argument("grid sample count " + std::to_string(samples.values.size()) +
                                " does not match torus spec (" +
                                std::to_string(spec.grid_count() * spec.dim) + ")");
  VectorField out(spec);
  auto& ws = detail::FftWorkspace::local(spec.dim, spec.grid);
  auto layout = detail::SpectralLayout::get(spec);
  for (int a = 0; a < spec.dim; ++a) {
    auto comp = samples.component(a);
    std::copy(comp.begin(), comp.end(), ws.real());
    detail::grid_to_modes(ws, *layout, out.component(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mode-wise operators

void leray_project_inplace(VectorField& f) {
  const auto& spec = f.spec();
  const int n = spec.dim;
  for (std::size_t idx = 0; idx < f.modes(); ++idx) {
    WaveVector k = wave_vector(spec, idx);
    const long k2 = norm_sq(k);
    if (k2 == 0) continue;
    cplx dot{};
    for (int a = 0; a < n; ++a) dot += static_cast<double>(k[a]) * f.at(a, idx);
    dot /= static_cast<double>(k2);
    for (int a = 0; a < n; ++a) f.at(a, idx) -= static_cast<double>(k[a]) * dot;
  }
}

VectorField leray_project(const VectorField& f) {
  VectorField out = f;
  leray_project_inplace(out);
  return out;
}

double sobolev_norm(const VectorField& f, double s) {
  const auto& spec = f.spec();
  const auto& eig = eigenvalue_table(spec);
  double sum = 0.0;
  for (std::size_t idx = 0; idx < f.modes(); ++idx) {
    double mag2 = 0.0;
    for (int a = 0; a < spec.dim; ++a) mag2 += std::norm(f.at(a, idx));
    if (mag2 == 0.0) continue;
    sum += (s == 0.0 ? 1.0 : std::pow(1.0 + eig[idx], s)) * mag2;
  }
  return std::sqrt(sum);
}

double lebesgue_norm(const PhysicalField& samples, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("Lebesgue exponent must satisfy q >= 1");
  const std::size_t npts = samples.spec.grid_count();
  const int n = samples.spec.dim;
  if (std::isinf(q)) {
    double mx = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
      double m2 = 0.0;
      for (int a = 0; a < n; ++a) m2 += samples.values[a * npts + i] * samples.values[a * npts + i];
      mx = std::max(mx, m2);
    }
    return std::sqrt(mx);
  }
  double sum = 0.0;
  const double half_q = 0.5 * q;
  for (std::size_t i = 0; i < npts; ++i) {
    double m2 = 0.0;
    for (int a = 0; a < n; ++a) m2 += samples.values[a * npts + i] * samples.values[a * npts + i];
    sum += half_q == 1.0 ? m2 : std::pow(m2, half_q);
  }
  return std::pow(sum / static_cast<double>(npts), 1.0 / q);
}

double lebesgue_norm(const VectorField& f, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("Lebesgue exponent must satisfy q >= 1");
  return lebesgue_norm(to_physical(f), q);
}

VectorField heat_propagate(const VectorField& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat propagation time must be >= 0");
  VectorField out = f;
  if (t == 0.0) return out;
  const auto& spec = f.spec();
  const auto& eig = eigenvalue_table(spec);
  for (std::size_t idx = 0; idx < f.modes(); ++idx) {
    const double decay = std::exp(-eig[idx] * t);
    for (int a = 0; a < spec.dim; ++a) out.at(a, idx) *= decay;
  }
  return out;
}

bool in_dealiasing_ball(const TorusSpec& spec, const WaveVector& k) {
  // |k| <= M/3  <=>  9|k|^2 <= M^2
  return 9 * norm_sq(k) <= static_cast<long>(spec.modes) * spec.modes;
}

void dealias_inplace(VectorField& f) {
  const auto& spec = f.spec();
  for (std::size_t idx = 0; idx < f.modes(); ++idx) {
    if (in_dealiasing_ball(spec, wave_vector(spec, idx))) continue;
    for (int a = 0; a < spec.dim; ++a) f.at(a, idx) = cplx{};
  }
}

double divergence_defect(const VectorField& f) {
  // Normalized by the largest coefficient, not per mode: modes that hold only
  // round-off have no meaningful direction.
  const auto& spec = f.spec();
  double worst = 0.0, largest = 0.0;
  for (std::size_t idx = 0; idx < f.modes(); ++idx) {
    WaveVector k = wave_vector(spec, idx);
    cplx dot{};
    double mag2 = 0.0;
    for (int a = 0; a < spec.dim; ++a) {
      dot += static_cast<double>(k[a]) * f.at(a, idx);
      mag2 += std::norm(f.at(a, idx));
    }
    largest = std::max(largest, std::sqrt(mag2));
    worst = std::max(worst, std::abs(dot));
  }
  return largest > 0.0 ? worst / largest : 0.0;
}

bool is_solenoidal(const VectorField& f, double tol) { return divergence_defect(f) <= tol; }

double hermitian_defect(const VectorField& f) {
  const auto& spec = f.spec();
  double worst = 0.0;
  for (std::size_t idx = 0; idx < f.modes(); ++idx) {
    WaveVector k = wave_vector(spec, idx);
    for (int a = 0; a < spec.dim; ++a) {
      if (is_nyquist(spec, k)) {
        worst = std::max(worst, std::abs(f.at(a, idx)));
        continue;
      }
      WaveVector mk{-k[0], -k[1], -k[2]};
      worst = std::max(worst, std::abs(f.at(a, mk) - std::conj(f.at(a, idx))));
    }
  }
  return worst;
}

double energy(const VectorField& f) {
  double sum = 0.0;
  for (const auto& z : f.data()) sum += std::norm(z);
  return sum;
}

double relative_l2_distance(const VectorField& a, const VectorField& b) {
  if (!(a.spec() == b.spec())) throw std::invalid_argument("field spec mismatch");
  double num = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) num += std::norm(a.data()[i] - b.data()[i]);
  const double den = energy(b);
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace randns
