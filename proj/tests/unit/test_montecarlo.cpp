#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "helpers.hpp"
#include "randns/montecarlo.hpp"
#include "randns/parallel.hpp"
#include "randns/randomization.hpp"

using namespace randns;
using testing::rel;

namespace {

VectorField cosine_mode(const TorusSpec& spec, int k = 1) {
  VectorField f(spec);
  f.at(0, WaveVector{0, k, 0}) = std::sqrt(0.5);
  f.at(0, WaveVector{0, -k, 0}) = std::sqrt(0.5);
  return f;
}

// |sqrt(2) cos|_{L^4} (int_0^T e^{-p lam t} dt)^{1/p}
double e2_single_mode_norm(int k, double T, double p = 4) {
  const double lam = 4 * kPi * kPi * k * k;
  return std::pow(1.5, 0.25) * std::pow(-std::expm1(-p * lam * T) / (p * lam), 1 / p);
}

}  // namespace

TEST_CASE("wilson interval") {
  const auto a = wilson_interval(5, 10);
  CHECK(a.lower == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(a.upper == doctest::Approx(0.7634).epsilon(1e-3));
  CHECK(wilson_interval(0, 100).lower == 0.0);
  CHECK(wilson_interval(100, 100).upper == 1.0);
  CHECK(wilson_upper(0, 10000) <= 3.0 / 10000);
  CHECK_THROWS_AS(wilson_interval(3, 0), std::invalid_argument);
}

TEST_CASE("moment estimates") {
  const std::vector<double> c(50, -2.0);
  const auto m = lr_moment(c, 3.0);
  CHECK(m.value == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.standard_error < 1e-14);
  // Jackknife of the mean (r = 1) is the classical standard error.
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(lr_moment(x, 1.0).standard_error == doctest::Approx(std::sqrt(2.5 / 5)).epsilon(1e-12));
}

TEST_CASE("khinchin moments") {
  const std::vector<double> e0{1.0};
  const auto r2 = khinchin_moment(e0, 2.0, 100000, 1);
  CHECK(std::abs(r2.value - 1.0) < 3 * r2.standard_error);
  // E g^4 = 3.
  CHECK(rel(khinchin_check(e0, 4.0, 100000, 2), std::pow(3.0, 0.25)) < 0.02);

  const std::vector<double> c{0.3, -1.2, 0.0, 2.0, 0.7};
  double l2 = 0;
  for (double v : c) l2 += v * v;
  const auto est = khinchin_moment(c, 2.0, 100000, 3);
  CHECK(std::abs(est.value - std::sqrt(l2)) < 3 * est.standard_error);

  CHECK_THROWS_AS(khinchin_check(c, 1.5, 1000), std::invalid_argument);
  CHECK_THROWS_AS(khinchin_check(c, 2.0, 999), std::invalid_argument);
}

TEST_CASE("selectors") {
  const auto mod = admissible_parameters(2, -0.2), rough = admissible_parameters(2, -0.6);
  CHECK_THROWS_AS(check_selector(Selector::E1, mod), SelectorMismatch);
  CHECK_THROWS_AS(check_selector(Selector::E2, rough), SelectorMismatch);
  CHECK_NOTHROW(check_selector(Selector::E3, mod));
  CHECK(selector_exponent(Selector::E2, mod) == doctest::Approx(0.15));
  CHECK(selector_exponent(Selector::E1, rough) == doctest::Approx(0.1));
  CHECK(selector_exponent(Selector::E3, mod) == doctest::Approx(0.125));
  CHECK(parse_selector("E3") == Selector::E3);
  CHECK_THROWS_AS(parse_selector("E4"), std::invalid_argument);

  const auto spec = TorusSpec::make(2, 8);
  const auto grid = TimeGrid::make(0.1, 512);
  CHECK(rel(selector_norm(cosine_mode(spec), grid, Selector::E2, mod), e2_single_mode_norm(1, 0.1)) < 1e-4);
}

TEST_CASE("tail probability") {
  const auto spec = TorusSpec::make(2, 8);
  const auto params = admissible_parameters(2, -0.2);
  const auto grid = TimeGrid::make(0.1, 256);
  const auto f = cosine_mode(spec);
  const double A = e2_single_mode_norm(1, 0.1);

  std::vector<double> lambdas{0.0};
  for (int i = 1; i <= 16; ++i) lambdas.push_back(A * 0.2 * i);
  lambdas.push_back(1e3);
  const std::size_t S = 10000;
  const auto est = tail_probability(f, params, Selector::E2, lambdas, grid, S, 17);
  CHECK(est.points.front().p_hat == 1.0);
  CHECK(est.points.back().p_hat == 0.0);
  CHECK(est.points.back().upper_one_sided <= 3.0 / S);

  int inside = 0, inside_wide = 0;
  for (std::size_t i = 1; i + 1 < est.points.size(); ++i) {
    const auto& pt = est.points[i];
    const double p = std::erfc(pt.lambda / (A * std::sqrt(2.0)));
    const auto wide = wilson_interval(pt.exceedances, S, 3.29);
    inside += pt.ci.lower <= p && p <= pt.ci.upper;
    inside_wide += wide.lower <= p && p <= wide.upper;
  }
  CHECK(inside >= 14);
  CHECK(inside_wide == 16);
  for (std::size_t i = 1; i < est.points.size(); ++i) CHECK(est.points[i].p_hat <= est.points[i - 1].p_hat);

  // Fitted Gaussian-tail coefficient against 1/(2 A^2), with the scale divided out.
  std::vector<double> l, p;
  for (const auto& pt : est.points) {
    l.push_back(pt.lambda);
    p.push_back(pt.p_hat);
  }
  const auto fit = fit_exponential_tail(l, p, 1.0);
  CHECK(rel(fit.c2, 1.0 / (2 * A * A)) < 0.25);

  CHECK_THROWS_AS(tail_probability(f, params, Selector::E1, {}, grid, S, 1), SelectorMismatch);
  CHECK_THROWS_AS(tail_probability(f, params, Selector::E2, {}, grid, 1999, 1), std::invalid_argument);
}

TEST_CASE("exponential tail fit") {
  std::vector<double> l, p;
  for (int i = 0; i <= 20; ++i) {
    l.push_back(0.1 * i);
    p.push_back(std::exp(-2 * l.back() * l.back()));
  }
  const auto fit = fit_exponential_tail(l, p, 1.0);
  CHECK(fit.c2 == doctest::Approx(2.0).epsilon(0.025));
  CHECK(fit.r_squared > 0.999);
  CHECK_FALSE(fit.flagged);

  const std::vector<double> flat(l.size(), 0.3);
  const auto u = fit_exponential_tail(l, flat, 1.0);
  CHECK(u.r_squared < 0.05);
  CHECK(u.flagged);

  const std::vector<double> none(l.size(), 0.9);
  CHECK_THROWS_AS(fit_exponential_tail(l, none, 1.0), std::invalid_argument);
}

TEST_CASE("scaling in T") {
  const auto spec = TorusSpec::make(2, 8);
  const auto params = admissible_parameters(2, -0.2);
  const std::vector<double> Ts{0.2, 0.1, 0.05, 0.025, 0.0125};

  VectorField k0(spec);
  k0.at(0, WaveVector{0, 0, 0}) = 1.0;
  const auto c = scaling_in_T(k0, params, Selector::E2, 2.0, Ts, 64, 200, 1);
  CHECK(c.slope == doctest::Approx(0.25).epsilon(1e-10));

  // High mode: the moment is proportional to the closed-form single-mode norm.
  const int k = 3;
  const auto hi = scaling_in_T(cosine_mode(spec, k), params, Selector::E2, 2.0, Ts, 256, 200, 1);
  double mx = 0, my = 0, sxx = 0, sxy = 0;
  for (double T : Ts) mx += std::log(T) / Ts.size(), my += std::log(e2_single_mode_norm(k, T)) / Ts.size();
  for (double T : Ts) {
    sxx += (std::log(T) - mx) * (std::log(T) - mx);
    sxy += (std::log(T) - mx) * (std::log(e2_single_mode_norm(k, T)) - my);
  }
  CHECK(hi.slope == doctest::Approx(sxy / sxx).epsilon(0.02));
  CHECK(hi.slope < 0.1);

  const auto canon = scaling_in_T(canonical_datum(TorusSpec::make(2, 16), -0.2), params, Selector::E2,
                                  2.0, Ts, 64, 200, 2);
  CHECK(canon.theta == doctest::Approx(0.15));
  CHECK(canon.slope >= 0.05);

  CHECK_THROWS_AS(scaling_in_T(k0, params, Selector::E2, 2.0, {0.2, 0.1, 0.05}, 64, 200, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(scaling_in_T(k0, params, Selector::E2, 2.0, {0.2, 0.1, 0.05, 0.02}, 64, 200, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(scaling_in_T(k0, params, Selector::E2, 1.0, Ts, 64, 200, 1), std::invalid_argument);
}

TEST_CASE("theorem experiment") {
  const auto spec = TorusSpec::make(2, 8);
  const auto params = admissible_parameters(2, -0.2);
  const std::vector<double> Ts{0.2, 0.1, 0.05, 0.025};

  const auto zero = theorem_experiment(VectorField(spec), params, Ts, 16, 0.5, 10, {}, 1);
  for (const auto& pt : zero.points) {
    CHECK(pt.p_hat == 1.0);
    CHECK(pt.member_converged == 10);
  }

  const auto f = canonical_datum(spec, -0.2, 2.0);
  const auto huge = theorem_experiment(f, params, {0.1}, 16, 1e12, 10, {}, 1);
  CHECK(huge.points[0].p_hat == 1.0);

  const auto cal = calibrate_lambda(f, params, Ts, 16, 16, {}, 99);
  CHECK(cal.lambda > 0.0);
  CHECK(cal.lambda <= cal.median_event);
  const auto res = theorem_experiment(f, params, Ts, 16, cal.lambda, 40, {}, 5);
  CHECK(res.monotone());
  CHECK(res.members_contract());
  for (std::size_t i = 1; i < res.points.size(); ++i) CHECK(res.points[i].members >= res.points[i - 1].members);
}

TEST_CASE("results do not depend on the worker count") {
  const auto spec = TorusSpec::make(2, 8);
  const auto params = admissible_parameters(2, -0.2);
  const auto f = canonical_datum(spec, -0.2);
  std::vector<std::vector<double>> runs;
  for (const char* w : {"1", "3"}) {
    setenv("RANDNS_THREADS", w, 1);
    CHECK(worker_count() == std::atoi(w));
    runs.push_back(tail_probability(f, params, Selector::E3, {}, TimeGrid::make(0.1, 16), 2000, 4).norms);
  }
  unsetenv("RANDNS_THREADS");
  CHECK(runs[0] == runs[1]);

  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += int(i); }, 4);
  for (std::size_t i = 0; i < hit.size(); ++i) CHECK(hit[i] == int(i));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }, 3),
                  std::runtime_error);
}
