#pragma once

#include <stdexcept>
#include <vector>

#include "randns/norms.hpp"
#include "randns/trajectory.hpp"

namespace randns {

/// What nonlinear_flux does with an input that is not divergence-free.
enum class FluxCheck { Reject, Warn, Ignore };

/// Raised by nonlinear_flux under FluxCheck::Reject.
class NotSolenoidal : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the reference time stepper when an iterate stops being finite.
class SolverInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// div(u (x) u), i.e. sum_b d_b(u_a u_b), from products formed on the physical grid.
/// Neither projected nor truncated.
VectorField momentum_flux_divergence(const VectorField& u);

/// P div(u (x) u) with every mode outside |k| <= M/3 set to zero. The output is
/// solenoidal and has a zero mean mode. Products are alias-free on retained modes
/// when 3G >= 4M; smaller grids are rejected.
VectorField nonlinear_flux(const VectorField& u, FluxCheck check = FluxCheck::Reject);

/// D[F](t_j) = int_0^{t_j} e^{(t_j - tau) Delta} F(tau) dtau, with F linear in tau on
/// each cell and the heat kernel integrated exactly per mode.
Trajectory duhamel_integrate(const std::vector<VectorField>& flux, const TimeGrid& grid);

/// K(v) = -D[P div((u_lin + v) (x) (u_lin + v))].
Trajectory duhamel_apply(const Trajectory& v, const Trajectory& u_lin);

struct PicardSettings {
  double tol = 1e-9;
  int max_iter = 60;
  double divergence_threshold = 1e6;
};

struct PicardDiagnostics {
  int iterations = 0;
  std::vector<double> differences;  // |v^{k+1} - v^k| in the regime's solution norm
  std::vector<double> ratios;       // differences[k] / differences[k-1]
  bool converged = false;
  bool diverged = false;
  double ball_radius = 0.0;         // lambda
  double solution_norm = 0.0;       // |v| of the last iterate

  /// Largest ratio after the first; 0 when fewer than two ratios exist.
  double max_ratio_after_first() const;
  /// Every ratio < 1 and the differences strictly decrease to convergence.
  bool geometric() const;
};

struct SolveOutcome {
  Trajectory v;  // fixed point of K
  Trajectory u;  // u_lin + v
  PicardDiagnostics diagnostics;
  double event_value = 0.0;  // event_norm(u_lin)
  bool event_member = false; // event_value < lambda
};

/// Whole-trajectory Picard iteration v^0 = 0, v^{k+1} = K(v^k), stopped when the
/// solution-space norm of the difference is <= tol.
SolveOutcome picard_solve(const VectorField& f_omega, const TimeGrid& grid,
                          const ParameterSet& params, double lambda,
                          const PicardSettings& settings = {});

/// max_j |u(t_j) - e^{t_j Delta} f + D[P div(u (x) u)](t_j)|_{L^2}.
double residual(const Trajectory& u, const VectorField& f_omega);

/// Exponential time differencing RK2 (Cox-Matthews) for
/// d_t u = Delta u - P div(u (x) u), using substeps steps per grid cell.
Trajectory reference_timestepper(const VectorField& u0, const TimeGrid& grid, int substeps = 1);

// phi-functions of the exponential integrators, evaluated at z = -a (a >= 0):
//   phi1 = (1 - e^{-a}) / a,   phi2 = (e^{-a} - 1 + a) / a^2.
double phi1(double a);
double phi2(double a);

}  // namespace randns
