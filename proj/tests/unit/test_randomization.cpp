#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "randns/randomization.hpp"

using namespace randns;
using testing::random_field;
using testing::rel;

TEST_CASE("philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("gaussian draws") {
  const RandomizationDraw d{42, 3};
  CHECK(d.gaussian(17) == RandomizationDraw{42, 3}.gaussian(17));
  CHECK(d.gaussian(17) != RandomizationDraw{42, 4}.gaussian(17));
  CHECK(d.gaussian(17) != RandomizationDraw{43, 3}.gaussian(17));
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = RandomizationDraw{1, std::uint64_t(i)}.gaussian(0);
    m1 += g;
    m2 += g * g;
    m4 += g * g * g * g;
  }
  m1 /= n, m2 /= n, m4 /= n;
  CHECK(std::abs(m1) < 5 / std::sqrt(n));
  CHECK(std::abs(m2 - 1) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3) < 5 * std::sqrt(96.0 / n));
  CHECK(open_unit(0) > 0.0);
  CHECK(open_unit(~0ULL) < 1.0);
}

TEST_CASE("real modes are ranked independently of the truncation") {
  const auto small = real_modes(TorusSpec::make(2, 8));
  const auto large = real_modes(TorusSpec::make(2, 16));
  CHECK(small->front().kind == RealMode::Kind::Constant);
  CHECK(small->front().index == 0);
  std::set<std::uint64_t> seen;
  for (const auto& m : *small) {
    CHECK(seen.insert(m.index).second);
    bool found = false;
    for (const auto& l : *large)
      if (l.k == m.k && l.kind == m.kind) {
        CHECK(l.index == m.index);
        found = true;
      }
    CHECK(found);
  }
  // (M-1)^N - 1 nonzero non-Nyquist vectors, one real mode each, plus the constant.
  CHECK(small->size() == 7u * 7u);
}

TEST_CASE("real basis decomposition") {
  const auto spec = TorusSpec::make(2, 8);
  const auto zero = decompose_real_basis(VectorField(spec));
  for (double a : zero.alpha) CHECK(a == 0.0);

  VectorField c(spec);  // sqrt(2) cos(2 pi x) (0, 1)
  c.at(1, WaveVector{1, 0, 0}) = std::sqrt(0.5);
  c.at(1, WaveVector{-1, 0, 0}) = std::sqrt(0.5);
  const auto rc = decompose_real_basis(c);
  int nonzero = 0;
  for (std::size_t n = 0; n < rc.size(); ++n) {
    if (rc.at(n, 0) != 0.0 || rc.at(n, 1) != 0.0) {
      ++nonzero;
      CHECK((*rc.modes)[n].k == WaveVector{1, 0, 0});
      CHECK((*rc.modes)[n].kind == RealMode::Kind::Cosine);
      CHECK(std::abs(rc.at(n, 0)) < 1e-15);
      CHECK(std::abs(rc.at(n, 1) - 1.0) < 1e-15);
    }
  }
  CHECK(nonzero == 1);

  for (int dim : {2, 3}) {
    const auto sp = TorusSpec::make(dim, 8);
    const auto f = random_field(sp, 77, false);
    CHECK(relative_l2_distance(recompose_real_basis(decompose_real_basis(f)), f) < 1e-12);
  }
}

TEST_CASE("recomposition matches pointwise evaluation of the eigenfunctions") {
  const auto spec = TorusSpec::make(2, 6);
  const auto f = random_field(spec, 4);
  const auto coeffs = decompose_real_basis(f);
  const auto phys = to_physical(f);
  const int G = spec.grid;
  double worst = 0;
  for (int i = 0; i < G; i += 3)
    for (int j = 0; j < G; j += 5) {
      double v = 0;
      for (std::size_t n = 0; n < coeffs.size(); ++n)
        v += coeffs.at(n, 0) * real_mode_value((*coeffs.modes)[n], {double(i) / G, double(j) / G, 0});
      worst = std::max(worst, std::abs(v - phys.component(0)[i * G + j]));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("randomize") {
  const auto spec = TorusSpec::make(2, 8);
  CHECK(energy(randomize(VectorField(spec), {0, 0})) == 0.0);

  // Single mode with alpha = (0, 1): the output coefficient is (0, g_n).
  const auto modes = real_modes(spec);
  const RealMode mode = (*modes)[3];
  const auto f = single_mode(spec, mode, {mode.k[1] != 0 ? 1.0 : 0.0, mode.k[1] != 0 ? 0.0 : 1.0, 0});
  double var = 0.0;
  const int S = 10000;
  for (int i = 0; i < S; ++i) {
    const RandomizationDraw d{5, std::uint64_t(i)};
    const auto fw = randomize(f, d);
    const auto c = decompose_real_basis(fw);
    const double g = d.gaussian(mode.index);
    const int axis = mode.k[1] != 0 ? 0 : 1;
    CHECK(std::abs(c.at(3, axis) - g) < 1e-12);
    CHECK(std::abs(c.at(3, 1 - axis)) < 1e-15);
    var += g * g;
  }
  var /= S;
  CHECK(var >= 0.94);
  CHECK(var <= 1.06);

  const auto r = random_field(spec, 8);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto fw = randomize(r, {9, i});
    CHECK(divergence_defect(fw) <= 1e-12);
    CHECK(hermitian_defect(fw) <= 1e-12);
  }
  CHECK(randomize(r, {9, 4}) == randomize(r, {9, 4}));
}

TEST_CASE("randomization draws do not depend on the truncation") {
  const auto a = TorusSpec::make(2, 8), b = TorusSpec::make(2, 16);
  const auto fa = canonical_datum(a, -0.3);
  VectorField fb(b);
  for (std::size_t i = 0; i < a.mode_count(); ++i) {
    const auto k = wave_vector(a, i);
    for (int c = 0; c < 2; ++c) fb.at(c, k) = fa.at(c, i);
  }
  const auto wa = randomize(fa, {3, 11});
  const auto wb = randomize(fb, {3, 11});
  for (std::size_t i = 0; i < a.mode_count(); ++i)
    for (int c = 0; c < 2; ++c) CHECK(wa.at(c, i) == wb.at(c, wave_vector(a, i)));
}

TEST_CASE("expected energy") {
  const auto spec = TorusSpec::make(2, 8);
  const auto z = expected_energy_check(VectorField(spec), -0.3, 100);
  CHECK(z.mean == 0.0);
  CHECK(z.exact == 0.0);

  const auto mode = (*real_modes(spec))[1];
  const auto f = single_mode(spec, mode, {mode.k[1] != 0 ? 1.0 : 0.0, mode.k[1] != 0 ? 0.0 : 1.0, 0});
  const auto e1 = expected_energy_check(f, 0.0, 10000, 2);
  CHECK(e1.mean >= 0.94 * e1.exact);
  CHECK(e1.mean <= 1.06 * e1.exact);

  const auto g = canonical_datum(spec, -0.4);
  const auto e2 = expected_energy_check(g, -0.4, 10000, 3);
  CHECK(rel(e2.exact, 1.0) < 1e-12);
  CHECK(std::abs(e2.mean - e2.exact) <= 3 * e2.standard_error);
}

TEST_CASE("data builders") {
  for (int dim : {2, 3}) {
    const auto spec = TorusSpec::make(dim, 16);
    const auto f = canonical_datum(spec, -0.3, 2.5);
    CHECK(rel(sobolev_norm(f, -0.3), 2.5) < 1e-12);
    CHECK(divergence_defect(f) < 1e-12);
    CHECK(hermitian_defect(f) < 1e-12);
    CHECK(canonical_datum(spec, -0.3, 2.5) == f);

    const auto sh = shear_flow(spec, 2.0);
    const auto p = to_physical(sh);
    const int G = spec.grid;
    const std::size_t stride = dim == 2 ? 1 : G;  // y index stride
    for (int j = 0; j < G; ++j)
      CHECK(p.component(0)[j * stride] == doctest::Approx(2.0 * std::sin(kTwoPi * j / G)).epsilon(1e-13));

    const auto tg = taylor_green(spec);
    CHECK(divergence_defect(tg) < 1e-14);
    const auto pt = to_physical(tg);
    const int i = 3, j = 5;
    const std::size_t idx = dim == 2 ? i * G + j : (std::size_t(i) * G + j) * G + 7;
    CHECK(pt.component(0)[idx] ==
          doctest::Approx(-std::cos(kTwoPi * i / G) * std::sin(kTwoPi * j / G)).epsilon(1e-13));
    CHECK(pt.component(1)[idx] ==
          doctest::Approx(std::sin(kTwoPi * i / G) * std::cos(kTwoPi * j / G)).epsilon(1e-13));

    const auto sm = smooth_datum(spec, 4, 3, 0.1);
    CHECK(rel(std::sqrt(energy(sm)), 0.1) < 1e-12);
    CHECK(divergence_defect(sm) < 1e-12);
  }
}
