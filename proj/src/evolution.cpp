#include "randns/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <string>

#include "fft_plan.hpp"

namespace randns {

// ---------------------------------------------------------------------------
// phi functions

namespace {

// Taylor series of phi1(-a), phi2(-a): sum_k (-a)^k / (k + 1)!, sum_k (-a)^k / (k + 2)!
double phi_series(double a, int shift) {
  double term = 1.0;
  for (int i = 1; i <= shift; ++i) term /= i;
  double sum = 0.0;
  for (int k = 0; k < 14; ++k) {
    sum += term;
    term *= -a / (k + 1 + shift);
  }
  return sum;
}

}  // namespace

double phi1(double a) {
  if (a < 0.1) return phi_series(a, 1);
  return -std::expm1(-a) / a;
}

double phi2(double a) {
  if (a < 0.1) return phi_series(a, 2);
  return (std::expm1(-a) + a) / (a * a);
}

// ---------------------------------------------------------------------------
// Nonlinear term

VectorField momentum_flux_divergence(const VectorField& u) {
  const auto& spec = u.spec();
  const int n = spec.dim;
  const std::size_t npts = spec.grid_count();
  auto& ws = detail::FftWorkspace::local(n, spec.grid);
  const auto layout = detail::SpectralLayout::get(spec);

  thread_local std::vector<double> phys;
  phys.resize(npts * n);
  for (int a = 0; a < n; ++a) {
    detail::component_to_grid(u, a, ws, *layout);
    std::copy_n(ws.real(), npts, phys.begin() + a * npts);
  }

  VectorField out(spec);
  thread_local std::vector<cplx> product;
  product.resize(spec.mode_count());
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const double* ua = phys.data() + a * npts;
      const double* ub = phys.data() + b * npts;
      double* r = ws.real();
      for (std::size_t p = 0; p < npts; ++p) r[p] = ua[p] * ub[p];
      detail::grid_to_modes(ws, *layout, product);
      // (div(u (x) u))_a += i 2 pi k_b (u_a u_b)^, and symmetrically for a != b.
      auto out_a = out.component(a);
      auto out_b = out.component(b);
      for (std::size_t idx = 0; idx < product.size(); ++idx) {
        const cplx ip = cplx{0.0, kTwoPi} * product[idx];
        const auto& k = layout->wavevectors[idx];
        out_a[idx] += static_cast<double>(k[b]) * ip;
        if (a != b) out_b[idx] += static_cast<double>(k[a]) * ip;
      }
    }
  }
  return out;
}

VectorField nonlinear_flux(const VectorField& u, FluxCheck check) {
  const auto& spec = u.spec();
  if (3 * spec.grid < 4 * spec.modes)
    throw std::invalid_argument("nonlinear flux needs grid >= 4M/3 for alias-free products (M = " +
                                std::to_string(spec.modes) + ", G = " + std::to_string(spec.grid) +
                                ")");
  if (check != FluxCheck::Ignore) {
    const double defect = divergence_defect(u);
    if (defect > 1e-10) {
      const std::string msg = "nonlinear flux input is not solenoidal (max |k.u|/|u| = " +
                              std::to_string(defect) + ")";
      if (check == FluxCheck::Reject) throw NotSolenoidal(msg);
      static std::once_flag warned;
      std::call_once(warned, [&] { std::cerr << "randns: warning: " << msg << "\n"; });
    }
  }
  VectorField flux = momentum_flux_divergence(u);
  leray_project_inplace(flux);
  dealias_inplace(flux);
  return flux;
}

// ---------------------------------------------------------------------------
// Duhamel quadrature

namespace {

struct EtdCoefficients {
  std::vector<double> decay;  // e^{-lambda h}
  std::vector<double> w0;     // h (phi1 - phi2): weight of the left node
  std::vector<double> w1;     // h phi2: weight of the right node
  std::vector<double> h_phi1; // h phi1
};

EtdCoefficients etd_coefficients(const TorusSpec& spec, double h) {
  const auto& eig = eigenvalue_table(spec);
  EtdCoefficients c;
  c.decay.resize(eig.size());
  c.w0.resize(eig.size());
  c.w1.resize(eig.size());
  c.h_phi1.resize(eig.size());
  for (std::size_t i = 0; i < eig.size(); ++i) {
    const double a = eig[i] * h;
    const double p1 = phi1(a), p2 = phi2(a);
    c.decay[i] = std::exp(-a);
    c.w0[i] = h * (p1 - p2);
    c.w1[i] = h * p2;
    c.h_phi1[i] = h * p1;
  }
  return c;
}

}  // namespace

Trajectory duhamel_integrate(const std::vector<VectorField>& flux, const TimeGrid& grid) {
  grid.validate();
  if (flux.size() != static_cast<std::size_t>(grid.nodes()))
    throw std::invalid_argument("flux samples do not match the time grid");
  const auto& spec = flux.front().spec();
  const auto coef = etd_coefficients(spec, grid.step());
  Trajectory out(grid, spec);
  const std::size_t modes = spec.mode_count();
  for (int j = 0; j < grid.steps; ++j) {
    const auto& prev = out[j];
    auto& next = out[j + 1];
    for (int a = 0; a < spec.dim; ++a) {
      auto p = prev.component(a);
      auto q = next.component(a);
      auto f0 = flux[j].component(a);
      auto f1 = flux[j + 1].component(a);
      for (std::size_t i = 0; i < modes; ++i)
        q[i] = coef.decay[i] * p[i] + coef.w0[i] * f0[i] + coef.w1[i] * f1[i];
    }
  }
  return out;
}

namespace {

std::vector<VectorField> flux_samples(const Trajectory& w) {
  std::vector<VectorField> flux;
  flux.reserve(w.states.size());
  for (const auto& state : w.states) flux.push_back(nonlinear_flux(state));
  return flux;
}

}  // namespace

Trajectory duhamel_apply(const Trajectory& v, const Trajectory& u_lin) {
  if (!(v.grid == u_lin.grid) || v.states.size() != u_lin.states.size())
    throw std::invalid_argument("duhamel_apply: time grids differ");
  if (!(v.spec() == u_lin.spec())) throw std::invalid_argument("duhamel_apply: torus specs differ");
  Trajectory out = duhamel_integrate(flux_samples(v + u_lin), v.grid);
  out *= -1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Picard iteration

double PicardDiagnostics::max_ratio_after_first() const {
  if (ratios.size() < 2) return 0.0;
  return *std::max_element(ratios.begin() + 1, ratios.end());
}

bool PicardDiagnostics::geometric() const {
  if (!converged) return false;
  return std::all_of(ratios.begin(), ratios.end(), [](double r) { return r < 1.0; });
}

namespace {
bool finite_trajectory(const Trajectory& t) {
  for (const auto& s : t.states)
    for (const auto& z : s.data())
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}
}  // namespace

SolveOutcome picard_solve(const VectorField& f_omega, const TimeGrid& grid,
                          const ParameterSet& params, double lambda,
                          const PicardSettings& settings) {
  if (!(settings.tol > 0.0)) throw std::invalid_argument("Picard tolerance must be > 0");
  if (settings.max_iter < 1) throw std::invalid_argument("Picard needs max_iter >= 1");
  if (f_omega.spec().dim != params.dim)
    throw std::invalid_argument("datum dimension does not match the parameter set");
  if (!is_solenoidal(f_omega, 1e-10))
    throw NotSolenoidal("Picard datum is not solenoidal");

  SolveOutcome out;
  const Trajectory u_lin = heat_trajectory(f_omega, grid);
  out.event_value = event_norm(u_lin, params);
  out.event_member = out.event_value < lambda;
  auto& diag = out.diagnostics;
  diag.ball_radius = lambda;

  Trajectory v(grid, f_omega.spec());
  double bound = 0.0;  // triangle-inequality bound on |v^k|
  for (int it = 1; it <= settings.max_iter; ++it) {
    Trajectory next = duhamel_apply(v, u_lin);
    diag.iterations = it;
    if (!finite_trajectory(next)) {
      diag.diverged = true;
      diag.differences.push_back(std::numeric_limits<double>::infinity());
      break;
    }
    const double d = solution_norm(next - v, params);
    if (!diag.differences.empty() && diag.differences.back() > 0.0)
      diag.ratios.push_back(d / diag.differences.back());
    diag.differences.push_back(d);
    v = std::move(next);
    if (!std::isfinite(d)) {
      diag.diverged = true;
      break;
    }
    if (d <= settings.tol) {
      diag.converged = true;
      break;
    }
    bound += d;
    if (bound > settings.divergence_threshold &&
        solution_norm(v, params) > settings.divergence_threshold) {
      diag.diverged = true;
      break;
    }
  }
  diag.solution_norm = diag.diverged ? std::numeric_limits<double>::infinity()
                                     : solution_norm(v, params);
  out.u = u_lin + v;
  out.v = std::move(v);
  return out;
}

double residual(const Trajectory& u, const VectorField& f_omega) {
  if (!(u.spec() == f_omega.spec())) throw std::invalid_argument("residual: torus specs differ");
  const Trajectory duhamel = duhamel_integrate(flux_samples(u), u.grid);
  double worst = 0.0;
  for (int j = 0; j < u.grid.nodes(); ++j) {
    VectorField r = u[j] - heat_propagate(f_omega, u.grid.node(j));
    r += duhamel[j];
    worst = std::max(worst, std::sqrt(energy(r)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// ETD-RK2 reference

Trajectory reference_timestepper(const VectorField& u0, const TimeGrid& grid, int substeps) {
  grid.validate();
  if (substeps < 1) throw std::invalid_argument("reference stepper needs substeps >= 1");
  const auto& spec = u0.spec();
  const double h = grid.step() / substeps;
  const auto coef = etd_coefficients(spec, h);
  const auto& eig = eigenvalue_table(spec);
  std::vector<double> h_phi2(eig.size());
  for (std::size_t i = 0; i < eig.size(); ++i) h_phi2[i] = h * phi2(eig[i] * h);

  Trajectory out;
  out.grid = grid;
  out.states.reserve(grid.nodes());
  out.states.push_back(u0);
  VectorField u = u0;
  const std::size_t modes = spec.mode_count();
  for (int j = 0; j < grid.steps; ++j) {
    for (int sub = 0; sub < substeps; ++sub) {
      const VectorField fu = nonlinear_flux(u);  // N(u) = -fu
      VectorField stage(spec);
      for (int a = 0; a < spec.dim; ++a) {
        auto x = u.component(a);
        auto y = stage.component(a);
        auto f = fu.component(a);
        for (std::size_t i = 0; i < modes; ++i) y[i] = coef.decay[i] * x[i] - coef.h_phi1[i] * f[i];
      }
      const VectorField fa = nonlinear_flux(stage);
      for (int a = 0; a < spec.dim; ++a) {
        auto x = u.component(a);
        auto y = stage.component(a);
        auto f0 = fu.component(a);
        auto f1 = fa.component(a);
        for (std::size_t i = 0; i < modes; ++i) x[i] = y[i] - h_phi2[i] * (f1[i] - f0[i]);
      }
    }
    for (const auto& z : u.data())
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw SolverInstability("reference stepper produced a non-finite state at t = " +
                                std::to_string(grid.node(j + 1)));
    out.states.push_back(u);
  }
  return out;
}

}  // namespace randns
