#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "randns/trajectory.hpp"

namespace randns {

/// Which existence regime a Sobolev index falls into.
///   Moderate: -1 + N/4 < s < 0, solution space X (weighted L^4 based).
///   Rough:    -1 < s <= -1 + N/4, solution space Y = L^{4/(1-s)}_T L^{2N/(1+s)}_x.
enum class Regime { Moderate, Rough };

const char* to_string(Regime r);

/// Raised when (N, s, m) violates an admissibility constraint; what() names it.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ParameterSet {
  int dim = 2;
  double s = -0.2;
  double m = 8.0;       // weighted-norm time exponent
  double delta = 0.125; // time weight exponent, (4-N)/8 - 1/m
  double rho = 0.05;    // T-exponent of the probability bound: min{1/m, s/2 + (4-N)/8}
  Regime regime = Regime::Moderate;
  double p_time = 4.0;  // Lebesgue time exponent of the regime's unweighted norm
  double q_space = 4.0; // matching space exponent
};

/// Select the regime from s, validate or default m (default 16/(4-N)) and derive
/// delta, rho and the Lebesgue exponents. In the rough regime rho = (1+s)/4, so the
/// tail scale T^{-2 rho} is T^{-(1+s)/2}; m is still validated when given.
ParameterSet admissible_parameters(int dim, double s, std::optional<double> m = std::nullopt);

/// Space exponents above this are evaluated at the cap (with a one-time warning).
inline constexpr double kMaxSpaceExponent = 64.0;

// ---------------------------------------------------------------------------
// Per-node spatial profiles

std::vector<double> lebesgue_profile(const Trajectory& u, double q);
std::vector<double> sobolev_profile(const Trajectory& u, double s);

/// L^q profiles of t -> e^{t Delta} f for several q, computed node by node
/// without storing the trajectory. Result is indexed [q][node].
std::vector<std::vector<double>> heat_lebesgue_profiles(const VectorField& f,
                                                        const TimeGrid& grid,
                                                        std::span<const double> qs);

// ---------------------------------------------------------------------------
// Time quadrature (composite trapezoid on the grid)

/// (int_0^T (t^delta profile(t))^m dt)^{1/m}
double weighted_time_norm(std::span<const double> profile, const TimeGrid& grid, double m,
                          double delta);
/// (int_0^T profile(t)^p dt)^{1/p}; p = infinity gives the maximum.
double time_norm(std::span<const double> profile, const TimeGrid& grid, double p);

// ---------------------------------------------------------------------------
// Space-time norms

double weighted_space_time_norm(const Trajectory& u, double m, double delta, double q);
double space_time_norm(const Trajectory& u, double p, double q);

struct XNormParts {
  double sup_sobolev = 0.0;  // L^inf_T H^{(N-2)/2}_x
  double weighted = 0.0;     // L^m_{delta;T} L^4_x
  double strichartz = 0.0;   // L^{8/(4-N)}_T L^4_x
  double total() const { return sup_sobolev + weighted + strichartz; }
};

XNormParts x_norm_parts(const Trajectory& u, const ParameterSet& params);
double x_norm(const Trajectory& u, const ParameterSet& params);
double y_norm(const Trajectory& u, const ParameterSet& params);

/// Norm of the regime's solution space (X for Moderate, Y for Rough).
double solution_norm(const Trajectory& u, const ParameterSet& params);

/// The scalar compared with lambda to decide event membership: weighted + Strichartz
/// L^4 norms in the Moderate regime, the Y norm in the Rough regime.
double event_norm(const Trajectory& u_lin, const ParameterSet& params);

}  // namespace randns
