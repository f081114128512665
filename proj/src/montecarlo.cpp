#include "randns/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "randns/parallel.hpp"
#include "randns/randomization.hpp"

namespace randns {

// ---------------------------------------------------------------------------
// Interval estimates

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) throw std::invalid_argument("Wilson interval of zero trials");
  if (k > n) throw std::invalid_argument("Wilson interval with more successes than trials");
  const double nn = static_cast<double>(n);
  const double p = k / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

double wilson_upper(std::size_t k, std::size_t n, double z) {
  return wilson_interval(k, n, z).upper;
}

MomentEstimate lr_moment(std::span<const double> x, double r) {
  if (!(r > 0)) throw std::invalid_argument("moment order must be positive");
  if (x.size() < 2) throw std::invalid_argument("moment estimate needs at least two samples");
  const std::size_t n = x.size();
  std::vector<double> pw(n);
  for (std::size_t i = 0; i < n; ++i) pw[i] = std::pow(std::abs(x[i]), r);
  const double sum = std::accumulate(pw.begin(), pw.end(), 0.0);
  MomentEstimate out;
  out.r = r;
  out.samples = n;
  out.value = std::pow(sum / n, 1.0 / r);
  // Leave-one-out replicates of the plug-in estimator.
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i)
    loo[i] = std::pow(std::max(0.0, sum - pw[i]) / (n - 1), 1.0 / r);
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  out.standard_error = std::sqrt(ss * (n - 1) / n);
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian series moments

MomentEstimate khinchin_moment(std::span<const double> c, double r, std::size_t S,
                               std::uint64_t seed) {
  if (!(r >= 2.0)) throw std::invalid_argument("Khinchin check needs r >= 2 (got " +
                                               std::to_string(r) + ")");
  if (S < 1000) throw std::invalid_argument("Khinchin check needs S >= 1000");
  if (c.empty()) throw std::invalid_argument("Khinchin check needs a nonempty coefficient sequence");
  std::vector<double> x(S);
  parallel_for(S, [&](std::size_t i) {
    const RandomizationDraw draw{seed, i};
    double acc = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n)
      if (c[n] != 0.0) acc += c[n] * draw.gaussian(n);
    x[i] = acc;
  });
  return lr_moment(x, r);
}

double khinchin_check(std::span<const double> c, double r, std::size_t S, std::uint64_t seed) {
  return khinchin_moment(c, r, S, seed).value;
}

// ---------------------------------------------------------------------------
// Event selectors

const char* to_string(Selector sel) {
  switch (sel) {
    case Selector::E1: return "E1";
    case Selector::E2: return "E2";
    case Selector::E3: return "E3";
  }
  return "?";
}

Selector parse_selector(const std::string& name) {
  if (name == "E1" || name == "e1") return Selector::E1;
  if (name == "E2" || name == "e2") return Selector::E2;
  if (name == "E3" || name == "e3") return Selector::E3;
  throw std::invalid_argument("unknown norm selector '" + name + "' (expected E1, E2 or E3)");
}

void check_selector(Selector sel, const ParameterSet& params) {
  const bool rough = params.regime == Regime::Rough;
  if ((sel == Selector::E1) != rough)
    throw SelectorMismatch(std::string("selector ") + to_string(sel) + " does not belong to the " +
                           to_string(params.regime) + " regime (s = " + std::to_string(params.s) +
                           "): E1 is rough-only, E2/E3 moderate-only");
}

double selector_exponent(Selector sel, const ParameterSet& params) {
  switch (sel) {
    case Selector::E1: return (1.0 + params.s) / 4.0;
    case Selector::E2: return params.s / 2.0 + (4.0 - params.dim) / 8.0;
    case Selector::E3: return params.rho;
  }
  return 0.0;
}

double selector_norm(const VectorField& f, const TimeGrid& grid, Selector sel,
                     const ParameterSet& params) {
  const int n = params.dim;
  switch (sel) {
    case Selector::E1: {
      const double q = 2.0 * n / (1.0 + params.s);
      const double qs[] = {q};
      const auto prof = heat_lebesgue_profiles(f, grid, qs);
      return time_norm(prof[0], grid, 4.0 / (1.0 - params.s));
    }
    case Selector::E2: {
      const double qs[] = {4.0};
      const auto prof = heat_lebesgue_profiles(f, grid, qs);
      return time_norm(prof[0], grid, 8.0 / (4.0 - n));
    }
    case Selector::E3: {
      const double qs[] = {4.0};
      const auto prof = heat_lebesgue_profiles(f, grid, qs);
      return weighted_time_norm(prof[0], grid, params.m, params.delta);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Tail probabilities

namespace {

double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double pos = p * (x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - lo) * (x[hi] - x[lo]);
}

}  // namespace

TailFit fit_exponential_tail(std::span<const double> lambdas, std::span<const double> p,
                             double scale, double low, double high) {
  if (lambdas.size() != p.size()) throw std::invalid_argument("tail fit: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= low && p[i] <= high && p[i] > 0.0) {
      xs.push_back(lambdas[i] * lambdas[i] * scale);
      ys.push_back(std::log(p[i]));
    }
  }
  if (xs.size() < 3)
    throw std::invalid_argument("tail fit window [" + std::to_string(low) + ", " +
                                std::to_string(high) + "] holds " + std::to_string(xs.size()) +
                                " lambda-points; need at least 3");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("tail fit: all lambda-points coincide");
  const double slope = sxy / sxx;
  TailFit fit;
  fit.points = xs.size();
  fit.c2 = -slope;
  fit.c1 = std::exp(my - slope * mx);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  fit.flagged = !(fit.c2 > 0.0) || fit.r_squared < kTailFitMinR2;
  return fit;
}

TailFit fit_exponential_tail(const TailEstimate& est) {
  std::vector<double> l, p;
  for (const auto& pt : est.points) {
    l.push_back(pt.lambda);
    p.push_back(pt.p_hat);
  }
  return fit_exponential_tail(l, p, est.scale, est.window_low, est.window_high);
}

TailEstimate tail_probability(const VectorField& f, const ParameterSet& params, Selector sel,
                              std::vector<double> lambdas, const TimeGrid& grid, std::size_t S,
                              std::uint64_t seed) {
  check_selector(sel, params);
  grid.validate();
  if (S < 2000) throw std::invalid_argument("tail estimate needs S >= 2000");
  if (f.spec().dim != params.dim)
    throw std::invalid_argument("datum dimension does not match the parameter set");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l))
      throw std::invalid_argument("lambda grid values must be finite and >= 0");

  TailEstimate est;
  est.selector = sel;
  est.params = params;
  est.grid = grid;
  est.samples = S;
  est.seed = seed;
  est.datum_norm = sobolev_norm(f, params.s);
  est.theta = selector_exponent(sel, params);
  est.scale = est.datum_norm > 0.0
                  ? 1.0 / (est.datum_norm * est.datum_norm) * std::pow(grid.T, -2.0 * est.theta)
                  : 1.0;

  est.norms.resize(S);
  parallel_for(S, [&](std::size_t i) {
    est.norms[i] = selector_norm(randomize(f, {seed, i}), grid, sel, params);
  });

  if (lambdas.empty()) {
    const double lo = quantile(est.norms, 0.5), hi = quantile(est.norms, 0.999);
    constexpr int kPoints = 24;
    for (int i = 0; i < kPoints; ++i) lambdas.push_back(lo + (hi - lo) * i / (kPoints - 1));
  }
  std::sort(lambdas.begin(), lambdas.end());

  std::vector<double> sorted = est.norms;
  std::sort(sorted.begin(), sorted.end());
  for (double l : lambdas) {
    TailPoint pt;
    pt.lambda = l;
    pt.exceedances = static_cast<std::size_t>(sorted.end() -
                                              std::lower_bound(sorted.begin(), sorted.end(), l));
    pt.p_hat = static_cast<double>(pt.exceedances) / S;
    pt.ci = wilson_interval(pt.exceedances, S);
    pt.upper_one_sided = wilson_upper(pt.exceedances, S);
    est.points.push_back(pt);
  }

  try {
    est.fit = fit_exponential_tail(est);
  } catch (const std::invalid_argument&) {
    est.fit = TailFit{};
    est.fit.flagged = true;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Scaling in T

void check_geometric_grid(std::span<const double> Ts, std::size_t min_points) {
  if (Ts.size() < min_points)
    throw std::invalid_argument("T-grid has " + std::to_string(Ts.size()) +
                                " points; need at least " + std::to_string(min_points));
  for (double T : Ts)
    if (!(T > 0.0 && T <= 1.0))
      throw std::invalid_argument("T-grid values must lie in (0, 1]");
  const double ratio = Ts[1] / Ts[0];
  if (ratio == 1.0) throw std::invalid_argument("T-grid values must be distinct");
  for (std::size_t i = 2; i < Ts.size(); ++i)
    if (std::abs(Ts[i] / Ts[i - 1] / ratio - 1.0) > 1e-9)
      throw std::invalid_argument("T-grid is not geometric");
}

ScalingFit scaling_in_T(const VectorField& f, const ParameterSet& params, Selector sel,
                        double r, std::vector<double> Ts, int steps, std::size_t S,
                        std::uint64_t seed) {
  check_selector(sel, params);
  if (!(r >= 2.0)) throw std::invalid_argument("scaling moment needs r >= 2");
  check_geometric_grid(Ts);
  if (S < 2) throw std::invalid_argument("scaling fit needs at least two samples");

  ScalingFit fit;
  fit.selector = sel;
  fit.r = r;
  fit.theta = selector_exponent(sel, params);

  // norms[t * S + i]: one draw per sample, reused at every T.
  std::vector<double> norms(Ts.size() * S);
  std::vector<TimeGrid> grids;
  for (double T : Ts) grids.push_back(TimeGrid::make(T, steps));
  parallel_for(S, [&](std::size_t i) {
    const VectorField fw = randomize(f, {seed, i});
    for (std::size_t t = 0; t < Ts.size(); ++t)
      norms[t * S + i] = selector_norm(fw, grids[t], sel, params);
  });

  std::vector<double> lx, ly;
  for (std::size_t t = 0; t < Ts.size(); ++t) {
    ScalingPoint pt;
    pt.T = Ts[t];
    pt.moment = lr_moment(std::span<const double>(norms).subspan(t * S, S), r);
    fit.points.push_back(pt);
    lx.push_back(std::log(pt.T));
    ly.push_back(std::log(pt.moment.value));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += e * e;
  }
  fit.slope_se = std::sqrt(sse / (n - 2) / sxx);
  return fit;
}

// ---------------------------------------------------------------------------
// Theorem-level experiment

bool TheoremResult::members_contract() const {
  for (const auto& pt : points)
    for (const auto& s : pt.samples)
      if (s.event_member && (!s.converged || !s.geometric || !(s.residual <= 10.0 * tol)))
        return false;
  return true;
}

bool TheoremResult::monotone() const {
  std::vector<const TheoremPoint*> order;
  for (const auto& pt : points) order.push_back(&pt);
  std::sort(order.begin(), order.end(),
            [](const TheoremPoint* a, const TheoremPoint* b) { return a->T > b->T; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (order[i]->p_hat < order[i - 1]->ci.lower) return false;
  return true;
}

namespace {

SampleOutcome solve_sample(const VectorField& fw, const TimeGrid& grid, const ParameterSet& params,
                           double lambda, const PicardSettings& settings, bool solve) {
  SampleOutcome out;
  if (!solve) {
    out.event_value = event_norm(heat_trajectory(fw, grid), params);
    out.event_member = out.event_value < lambda;
    out.residual = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const SolveOutcome sol = picard_solve(fw, grid, params, lambda, settings);
  const auto& d = sol.diagnostics;
  out.event_value = sol.event_value;
  out.event_member = sol.event_member;
  out.converged = d.converged;
  out.diverged = d.diverged;
  out.geometric = d.geometric();
  out.iterations = d.iterations;
  out.max_ratio = d.max_ratio_after_first();
  out.ratios = d.ratios;
  out.residual = d.converged ? residual(sol.u, fw) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace

TheoremResult theorem_experiment(const VectorField& f, const ParameterSet& params,
                                 std::vector<double> Ts, int steps, double lambda,
                                 std::size_t S, const PicardSettings& settings,
                                 std::uint64_t seed, bool solve_nonmembers) {
  if (Ts.empty()) throw std::invalid_argument("theorem experiment needs a nonempty T-grid");
  if (!(lambda > 0.0)) throw std::invalid_argument("theorem experiment needs lambda > 0");
  if (S < 1) throw std::invalid_argument("theorem experiment needs S >= 1");

  TheoremResult res;
  res.params = params;
  res.lambda = lambda;
  res.steps = steps;
  res.S = S;
  res.seed = seed;
  res.tol = settings.tol;

  std::vector<TimeGrid> grids;
  for (double T : Ts) grids.push_back(TimeGrid::make(T, steps));
  std::vector<SampleOutcome> all(Ts.size() * S);
  parallel_for(S, [&](std::size_t i) {
    const VectorField fw = randomize(f, {seed, i});
    for (std::size_t t = 0; t < Ts.size(); ++t) {
      const bool solve = solve_nonmembers ||
                         event_norm(heat_trajectory(fw, grids[t]), params) < lambda;
      auto& o = all[t * S + i];
      o = solve_sample(fw, grids[t], params, lambda, settings, solve);
      o.index = i;
    }
  });

  for (std::size_t t = 0; t < Ts.size(); ++t) {
    TheoremPoint pt;
    pt.T = Ts[t];
    pt.samples.assign(all.begin() + t * S, all.begin() + (t + 1) * S);
    for (const auto& s : pt.samples) {
      if (!s.event_member) continue;
      ++pt.members;
      if (s.converged) {
        ++pt.member_converged;
        pt.max_member_residual = std::max(pt.max_member_residual, s.residual);
      }
      if (s.geometric) ++pt.member_geometric;
      pt.max_member_ratio = std::max(pt.max_member_ratio, s.max_ratio);
    }
    pt.p_hat = static_cast<double>(pt.members) / S;
    pt.ci = wilson_interval(pt.members, S);
    pt.conditional_rate =
        pt.members ? static_cast<double>(pt.member_converged) / pt.members : 1.0;
    res.points.push_back(std::move(pt));
  }
  return res;
}

Calibration calibrate_lambda(const VectorField& f, const ParameterSet& params,
                             std::vector<double> Ts, int steps, std::size_t S,
                             const PicardSettings& settings, std::uint64_t seed, double safety) {
  if (Ts.empty()) throw std::invalid_argument("calibration needs a nonempty T-grid");
  if (S < 2) throw std::invalid_argument("calibration needs at least two samples");
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("safety must lie in (0, 1]");
  std::sort(Ts.begin(), Ts.end(), std::greater<>());
  std::vector<TimeGrid> grids;
  for (double T : Ts) grids.push_back(TimeGrid::make(T, steps));
  std::vector<SampleOutcome> out(S * Ts.size());
  parallel_for(S, [&](std::size_t i) {
    const VectorField fw = randomize(f, {seed, i});
    for (std::size_t t = 0; t < grids.size(); ++t)
      out[t * S + i] = solve_sample(fw, grids[t], params,
                                    std::numeric_limits<double>::infinity(), settings, true);
  });
  Calibration cal;
  cal.samples = S;
  cal.contraction_limit = std::numeric_limits<double>::infinity();
  std::vector<double> events;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto& o = out[j];
    if (j < S) events.push_back(o.event_value);
    if (!o.converged || !o.geometric || !(o.residual <= 10.0 * settings.tol)) {
      ++cal.failures;
      cal.contraction_limit = std::min(cal.contraction_limit, o.event_value);
    }
  }
  cal.median_event = quantile(events, 0.5);
  cal.lambda = std::min(safety * cal.contraction_limit, cal.median_event);
  return cal;
}

}  // namespace randns
