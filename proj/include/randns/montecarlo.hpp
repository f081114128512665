#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "randns/evolution.hpp"
#include "randns/norms.hpp"

namespace randns {

// ---------------------------------------------------------------------------
// Interval estimates

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

inline constexpr double kZ95TwoSided = 1.959963984540054;
inline constexpr double kZ95OneSided = 1.6448536269514722;

/// Wilson score interval for k successes in n trials.
Interval wilson_interval(std::size_t k, std::size_t n, double z = kZ95TwoSided);

/// One-sided Wilson upper bound (the default z gives a 95% one-sided bound).
double wilson_upper(std::size_t k, std::size_t n, double z = kZ95OneSided);

/// (E|X|^r)^{1/r} from samples, with a jackknife standard error.
struct MomentEstimate {
  double r = 2.0;
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

MomentEstimate lr_moment(std::span<const double> x, double r);

// ---------------------------------------------------------------------------
// Gaussian series moments

/// Monte Carlo (E|sum_n c_n g_n|^r)^{1/r} over S draws (sample_index 0..S-1).
MomentEstimate khinchin_moment(std::span<const double> c, double r, std::size_t S,
                               std::uint64_t seed = 0);
double khinchin_check(std::span<const double> c, double r, std::size_t S,
                      std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Event selectors

///   E1: L^{4/(1-s)}_T L^{2N/(1+s)}_x   (rough regime)
///   E2: L^{8/(4-N)}_T L^4_x            (moderate regime)
///   E3: L^m_{delta;T} L^4_x            (moderate regime)
enum class Selector { E1, E2, E3 };

const char* to_string(Selector sel);
Selector parse_selector(const std::string& name);

class SelectorMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws SelectorMismatch unless sel belongs to params.regime.
void check_selector(Selector sel, const ParameterSet& params);

/// T-exponent of the selector's moment bound: (1+s)/4, s/2 + (4-N)/8, rho.
double selector_exponent(Selector sel, const ParameterSet& params);

/// Selected norm of t -> e^{t Delta} f on grid.
double selector_norm(const VectorField& f, const TimeGrid& grid, Selector sel,
                     const ParameterSet& params);

// ---------------------------------------------------------------------------
// Tail probabilities

struct TailPoint {
  double lambda = 0.0;
  std::size_t exceedances = 0;  // samples with norm >= lambda
  double p_hat = 0.0;
  Interval ci;
  double upper_one_sided = 1.0;
};

struct TailFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  bool flagged = false;  // c2 <= 0 or R^2 below kTailFitMinR2
};

inline constexpr double kTailFitMinR2 = 0.9;

struct TailEstimate {
  Selector selector = Selector::E2;
  ParameterSet params;
  TimeGrid grid;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double datum_norm = 0.0;  // |f|_{H^s}
  double theta = 0.0;
  double scale = 1.0;       // |f|^{-2}_{H^s} T^{-2 theta}
  double window_low = 0.001;
  double window_high = 0.5;
  std::vector<double> norms;  // per sample, by sample index
  std::vector<TailPoint> points;
  TailFit fit;
};

/// Randomize f S times, evaluate the selected norm of each heat trajectory and count
/// exceedances on the lambda grid. An empty grid is filled with 24 evenly spaced
/// values between the sample median and the 0.999-quantile. The exponential law is
/// fitted when at least three points fall in the window; otherwise fit.points = 0 and
/// fit.flagged is set.
TailEstimate tail_probability(const VectorField& f, const ParameterSet& params, Selector sel,
                              std::vector<double> lambdas, const TimeGrid& grid, std::size_t S,
                              std::uint64_t seed);

/// Least squares of ln p against lambda^2 scale over the points with p in [low, high]:
/// ln p = ln c1 - c2 lambda^2 scale. Throws with fewer than three usable points.
TailFit fit_exponential_tail(std::span<const double> lambdas, std::span<const double> p,
                             double scale, double low = 0.001, double high = 0.5);
TailFit fit_exponential_tail(const TailEstimate& est);

// ---------------------------------------------------------------------------
// Scaling in T

struct ScalingPoint {
  double T = 0.0;
  MomentEstimate moment;
};

struct ScalingFit {
  Selector selector = Selector::E2;
  double r = 2.0;
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double theta = 0.0;
  bool contract_met() const { return slope >= theta - 0.1; }
};

/// Validate a T-grid: at least min_points values in (0, 1] with a constant ratio.
void check_geometric_grid(std::span<const double> Ts, std::size_t min_points = 4);

/// Per T, the L^r_omega moment of the selected norm (the same draws at every T, each T
/// using `steps` time cells); then ordinary least squares of ln(moment) on ln(T).
ScalingFit scaling_in_T(const VectorField& f, const ParameterSet& params, Selector sel,
                        double r, std::vector<double> Ts, int steps, std::size_t S,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Theorem-level experiment

struct SampleOutcome {
  std::uint64_t index = 0;
  double event_value = 0.0;
  bool event_member = false;
  bool converged = false;
  bool diverged = false;
  bool geometric = false;
  int iterations = 0;
  double max_ratio = 0.0;  // over ratios after the first
  double residual = 0.0;   // NaN unless converged
  std::vector<double> ratios;
};

struct TheoremPoint {
  double T = 0.0;
  std::size_t members = 0;
  double p_hat = 0.0;
  Interval ci;
  std::size_t member_converged = 0;
  std::size_t member_geometric = 0;
  double conditional_rate = 1.0;  // member_converged / members (1 when no members)
  double max_member_residual = 0.0;
  double max_member_ratio = 0.0;
  std::vector<SampleOutcome> samples;
};

struct TheoremResult {
  ParameterSet params;
  double lambda = 0.0;
  int steps = 0;
  std::size_t S = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::vector<TheoremPoint> points;  // in the order of the supplied T-grid

  /// Every event member at every T converged geometrically with residual <= 10 tol.
  bool members_contract() const;
  /// p_hat(T) does not drop below the previous (larger T) lower CI bound as T decreases.
  bool monotone() const;
};

/// Solve every sample of the ensemble by Picard iteration at every T of the grid. With
/// solve_nonmembers = false, samples outside the event are only classified.
TheoremResult theorem_experiment(const VectorField& f, const ParameterSet& params,
                                 std::vector<double> Ts, int steps, double lambda,
                                 std::size_t S, const PicardSettings& settings,
                                 std::uint64_t seed, bool solve_nonmembers = true);

struct Calibration {
  double lambda = 0.0;             // value to run the experiment at
  double contraction_limit = 0.0;  // smallest event value whose sample failed to contract
  double median_event = 0.0;
  std::size_t samples = 0;
  std::size_t failures = 0;
};

/// Empirical contraction radius on an ensemble independent of the experiment seed:
/// solve every sample at every T of the grid and take the smallest event value among
/// solves that did not converge geometrically (infinity when none failed). The returned
/// lambda is min(safety * contraction_limit, median event value at the largest T), so
/// the event stays informative when nothing fails.
Calibration calibrate_lambda(const VectorField& f, const ParameterSet& params,
                             std::vector<double> Ts, int steps, std::size_t S,
                             const PicardSettings& settings, std::uint64_t seed,
                             double safety = 0.5);

}  // namespace randns
