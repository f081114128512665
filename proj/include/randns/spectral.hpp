#pragma once

#include <array>
#include <memory>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace randns {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Truncated Fourier setting on the unit torus T^N.
///
/// Retained wavevectors satisfy -M/2 < k_i <= M/2. The Nyquist plane k_i = M/2 is
/// part of the storage box but is held at zero in every valid field so that each
/// retained k has its Hermitian partner -k inside the box. Physical samples live on
/// a uniform G^N grid with G >= M.
struct TorusSpec {
  int dim = 2;
  int modes = 16;  // M
  int grid = 32;   // G

  /// Validating constructor. grid <= 0 selects G = 2M.
  static TorusSpec make(int dim, int modes, int grid = 0);

  void validate() const;

  std::size_t mode_count() const;  // M^N
  std::size_t grid_count() const;  // G^N
  int kmin() const { return -modes / 2 + 1; }
  int kmax() const { return modes / 2; }

  friend bool operator==(const TorusSpec&, const TorusSpec&) = default;
};

/// Integer wavevector; components beyond dim are zero.
using WaveVector = std::array<int, 3>;

inline long norm_sq(const WaveVector& k) {
  return static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] +
         static_cast<long>(k[2]) * k[2];
}

/// Eigenvalue of -Delta on T^N attached to e^{2 pi i k.x}: 4 pi^2 |k|^2.
double eigenvalue(const WaveVector& k);

/// 4 pi^2 |k|^2 for every storage position of spec (cached per spec).
const std::vector<double>& eigenvalue_table(const TorusSpec& spec);

/// Lexicographic storage position of k (first component slowest).
std::size_t mode_index(const TorusSpec& spec, const WaveVector& k);
WaveVector wave_vector(const TorusSpec& spec, std::size_t index);
bool is_nyquist(const TorusSpec& spec, const WaveVector& k);
bool in_box(const TorusSpec& spec, const WaveVector& k);

/// Real vector field on T^N held as complex Fourier coefficients, one block of
/// M^N coefficients per component in lexicographic k order.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(TorusSpec spec);

  const TorusSpec& spec() const { return spec_; }
  int components() const { return spec_.dim; }
  std::size_t modes() const { return modes_; }

  std::span<cplx> component(int a) { return {coeffs_.data() + a * modes_, modes_}; }
  std::span<const cplx> component(int a) const {
    return {coeffs_.data() + a * modes_, modes_};
  }
  cplx& at(int a, std::size_t idx) { return coeffs_[a * modes_ + idx]; }
  const cplx& at(int a, std::size_t idx) const { return coeffs_[a * modes_ + idx]; }
  cplx& at(int a, const WaveVector& k) { return at(a, mode_index(spec_, k)); }
  const cplx& at(int a, const WaveVector& k) const { return at(a, mode_index(spec_, k)); }

  std::span<cplx> data() { return coeffs_; }
  std::span<const cplx> data() const { return coeffs_; }

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double c);

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double c, VectorField a) { return a *= c; }
  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  TorusSpec spec_{};
  std::size_t modes_ = 0;
  std::vector<cplx> coeffs_;
};

/// Samples of an N-component real field on the G^N grid, component-major, first
/// axis slowest.
struct PhysicalField {
  TorusSpec spec;
  std::vector<double> values;

  std::span<double> component(int a) {
    return {values.data() + a * spec.grid_count(), spec.grid_count()};
  }
  std::span<const double> component(int a) const {
    return {values.data() + a * spec.grid_count(), spec.grid_count()};
  }
};

PhysicalField to_physical(const VectorField& f);
VectorField to_spectral(const PhysicalField& samples);

/// Mode-wise Helmholtz-Weyl projection u - k (k.u)/|k|^2; identity at k = 0.
VectorField leray_project(const VectorField& f);
void leray_project_inplace(VectorField& f);

/// (sum_k (1 + 4 pi^2 |k|^2)^s |u(k)|^2)^{1/2}. With unit torus volume this equals
/// the real-eigenbasis sum sum_n |alpha_n|^2 (1 + lambda_n^2)^s.
double sobolev_norm(const VectorField& f, double s);

/// Riemann-sum L^q norm of the Euclidean magnitude on the G^N grid;
/// q = infinity gives the grid maximum.
double lebesgue_norm(const VectorField& f, double q);
double lebesgue_norm(const PhysicalField& samples, double q);

/// Multiply each coefficient by exp(-4 pi^2 |k|^2 t).
VectorField heat_propagate(const VectorField& f, double t);

/// Zero every mode with |k| > M/3.
void dealias_inplace(VectorField& f);
bool in_dealiasing_ball(const TorusSpec& spec, const WaveVector& k);

/// max_k |k.u(k)| / max_k |u(k)| (0 for the zero field).
double divergence_defect(const VectorField& f);
bool is_solenoidal(const VectorField& f, double tol = 1e-12);

/// max over retained k of |u(-k) - conj(u(k))|, plus any nonzero Nyquist entry.
double hermitian_defect(const VectorField& f);

/// sum_a sum_k |u_a(k)|^2, the squared L^2 norm.
double energy(const VectorField& f);

/// Relative L^2 distance |a - b| / |b| (absolute when b = 0).
double relative_l2_distance(const VectorField& a, const VectorField& b);

}  // namespace randns
