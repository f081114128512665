#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "randns/norms.hpp"
#include "randns/randomization.hpp"

using namespace randns;
using testing::rel;

namespace {

VectorField unit_constant(const TorusSpec& spec) {
  VectorField f(spec);
  f.at(0, WaveVector{0, 0, 0}) = 1.0;
  return f;
}

// sqrt(2) cos(2 pi x_2) e_1: |.|_{L^4} = (3/2)^{1/4}.
VectorField cosine_mode(const TorusSpec& spec, int k = 1) {
  VectorField f(spec);
  f.at(0, WaveVector{0, k, 0}) = std::sqrt(0.5);
  f.at(0, WaveVector{0, -k, 0}) = std::sqrt(0.5);
  return f;
}

// Adaptive Simpson for the closed-form time integrals.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("admissible parameters") {
  auto p = admissible_parameters(3, -0.1, 16.0);
  CHECK(p.regime == Regime::Moderate);
  CHECK(rel(p.delta, 1.0 / 16) < 1e-14);
  CHECK(rel(p.rho, 1.0 / 16) < 1e-14);

  p = admissible_parameters(2, -0.4, 8.0);
  CHECK(p.regime == Regime::Moderate);
  CHECK(rel(p.delta, 1.0 / 8) < 1e-14);
  CHECK(rel(p.rho, 0.05) < 1e-12);

  p = admissible_parameters(2, -0.6);
  CHECK(p.regime == Regime::Rough);
  CHECK(rel(p.p_time, 2.5) < 1e-14);
  CHECK(rel(p.q_space, 10.0) < 1e-14);
  CHECK(rel(p.rho, 0.1) < 1e-12);

  p = admissible_parameters(2, -0.2);
  CHECK(p.m == 8.0);
  CHECK(p.delta == 0.125);

  CHECK_THROWS_WITH_AS(admissible_parameters(2, -1.5), doctest::Contains("-1 < s < 0"), ParameterError);
  CHECK_THROWS_AS(admissible_parameters(2, 0.0), ParameterError);
  CHECK_THROWS_WITH_AS(admissible_parameters(3, -0.1, 5.0), doctest::Contains("(8, 16]"), ParameterError);
  CHECK_THROWS_AS(admissible_parameters(2, -0.2, 4.0), ParameterError);
  CHECK_THROWS_AS(admissible_parameters(2, -0.2, 8.0 + 1e-9), ParameterError);
  CHECK_NOTHROW(admissible_parameters(2, -0.2, 4.0 + 1e-9));
}

TEST_CASE("weighted time norm of a constant unit field") {
  const auto spec = TorusSpec::make(2, 8);
  const auto grid = TimeGrid::make(0.3, 400);
  const auto u = constant_trajectory(unit_constant(spec), grid);
  const double m = 8, delta = 0.125;
  const double exact = std::pow(std::pow(0.3, delta * m + 1) / (delta * m + 1), 1 / m);
  CHECK(rel(weighted_space_time_norm(u, m, delta, 4.0), exact) < 1e-4);
  CHECK(weighted_space_time_norm(u, m, 0.0, 4.0) == space_time_norm(u, m, 4.0));
  CHECK(rel(space_time_norm(u, 3.0, 4.0), std::pow(0.3, 1.0 / 3)) < 1e-13);
  CHECK(rel(space_time_norm(u, INFINITY, 2.0), 1.0) < 1e-14);
}

TEST_CASE("single heat mode against closed-form time integrals") {
  const auto spec = TorusSpec::make(2, 8);
  const auto grid = TimeGrid::make(0.05, 512);
  const auto f = cosine_mode(spec);
  const auto u = heat_trajectory(f, grid);
  const double lam = 4 * kPi * kPi, a4 = std::pow(1.5, 0.25);
  const double m = 8, delta = 0.125;
  const double weighted = a4 * std::pow(simpson([&](double t) {
    return std::pow(t, delta * m) * std::exp(-m * lam * t);
  }, 0, 0.05), 1 / m);
  CHECK(rel(weighted_space_time_norm(u, m, delta, 4.0), weighted) < 1e-3);
  const double p = 4;  // 8/(4-N)
  const double strich = a4 * std::pow((1 - std::exp(-p * lam * 0.05)) / (p * lam), 1 / p);
  CHECK(rel(space_time_norm(u, p, 4.0), strich) < 1e-3);
  CHECK(rel(space_time_norm(u, INFINITY, 2.0), 1.0) < 1e-14);
}

TEST_CASE("on-the-fly heat profiles agree with stored trajectories") {
  const auto spec = TorusSpec::make(3, 8);
  const auto f = canonical_datum(spec, -0.3);
  const auto grid = TimeGrid::make(0.02, 16);
  const double qs[] = {4.0, 10.0};
  const auto prof = heat_lebesgue_profiles(f, grid, qs);
  const auto u = heat_trajectory(f, grid);
  for (int i = 0; i < 2; ++i) {
    const auto direct = lebesgue_profile(u, qs[i]);
    for (int j = 0; j < grid.nodes(); ++j) CHECK(rel(prof[i][j], direct[j]) < 1e-12);
  }
}

TEST_CASE("X norm") {
  const auto spec = TorusSpec::make(2, 8);
  const auto params = admissible_parameters(2, -0.2);
  const auto grid = TimeGrid::make(0.2, 256);
  CHECK(x_norm(Trajectory(grid, spec), params) == 0.0);

  const auto parts = x_norm_parts(constant_trajectory(unit_constant(spec), grid), params);
  const double dm = params.delta * params.m;
  CHECK(rel(parts.sup_sobolev, 1.0) < 1e-14);
  CHECK(rel(parts.weighted, std::pow(std::pow(0.2, dm + 1) / (dm + 1), 1 / params.m)) < 1e-4);
  CHECK(rel(parts.strichartz, std::pow(0.2, 0.25)) < 1e-12);
  CHECK(parts.total() == doctest::Approx(x_norm(constant_trajectory(unit_constant(spec), grid), params)));

  // Dense quadrature (4x J) of the multi-mode heat trajectory.
  const auto f = canonical_datum(spec, -0.2);
  const auto coarse = x_norm_parts(heat_trajectory(f, TimeGrid::make(0.05, 256)), params);
  const auto fine = x_norm_parts(heat_trajectory(f, TimeGrid::make(0.05, 1024)), params);
  CHECK(rel(coarse.total(), fine.total()) < 1e-3);
  CHECK(rel(coarse.strichartz, fine.strichartz) < 1e-3);

  CHECK_THROWS_AS(y_norm(constant_trajectory(f, grid), params), std::invalid_argument);
}

TEST_CASE("Y norm") {
  const auto spec = TorusSpec::make(2, 8);
  const auto params = admissible_parameters(2, -0.6);
  const auto grid = TimeGrid::make(0.2, 64);
  const auto u = constant_trajectory(unit_constant(spec), grid);
  CHECK(rel(y_norm(u, params), std::pow(0.2, 1 / 2.5)) < 1e-12);
  CHECK_THROWS_AS(x_norm(u, params), std::invalid_argument);
}

TEST_CASE("event norm") {
  const auto spec = TorusSpec::make(2, 8);
  for (double s : {-0.2, -0.6}) {
    const auto params = admissible_parameters(2, s);
    const auto grid = TimeGrid::make(0.1, 64);
    CHECK(event_norm(Trajectory(grid, spec), params) == 0.0);
    const auto f = cosine_mode(spec, 2);
    const double one = event_norm(heat_trajectory(f, grid), params);
    CHECK(rel(event_norm(heat_trajectory(3.5 * f, grid), params), 3.5 * one) < 1e-12);
    const auto g = canonical_datum(spec, s);
    CHECK(event_norm(heat_trajectory(g, TimeGrid::make(0.05, 64)), params) <
          event_norm(heat_trajectory(g, grid), params));
  }
}
