#include <doctest.h>

#include <cmath>
#include <random>

#include "qsm/error.hpp"
#include "qsm/fft.hpp"
#include "qsm/symbols.hpp"
#include "support.hpp"

using namespace qsm;
using qsm::testing::random_xi;

TEST_CASE("dipole kernel at the reference directions") {
  CHECK(dipole_D({0, 0, 1}) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  CHECK(dipole_D({1, 0, 0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(std::abs(dipole_D({1, 1, 1})) < 1e-16);
  CHECK(dipole_D({0, 0, 0}) == 0.0);
}

TEST_CASE("wave symbol values") {
  CHECK(wave_p({1, 1, 1}) == 0.0);
  CHECK(wave_p({0, 0, 2}) == doctest::Approx(-8.0 / 3.0).epsilon(1e-15));
  CHECK(wave_p({0, 0, 2}) == doctest::Approx(4.0 * dipole_D({0, 0, 2})).epsilon(1e-15));
  CHECK(wave_p({3, 4, 0}) == doctest::Approx(25.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("factored symbol equals the expanded one") {
  CHECK(std::abs(factored_p({1, 1, 1})) < 1e-15);
  CHECK(factored_p({0, 0, 1}) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  std::mt19937_64 rng(101);
  for (int t = 0; t < 20000; ++t) {
    const Vec3 xi = random_xi(rng);
    const double p = wave_p(xi);
    REQUIRE(std::abs(factored_p(xi) - p) < 1e-14 * (1.0 + std::abs(p)) * 16.0);
  }
}

TEST_CASE("cutoff b examples") {
  const CutoffProfile f;
  CHECK(cutoff_b({1, 1, 1}, 0.04, f) == 1.0);
  CHECK(cutoff_b({2.5, 2.5, 2.5}, 0.04, f) == 1.0);
  CHECK(cutoff_b({0, 0, 1}, 0.04, f) == 0.0);
  // |p|/hbar = 1.5 sits inside the transition: p = rho^2/3 on the equator.
  const double r15 = std::sqrt(1.5 * 0.04 * 3.0);
  const double mid = cutoff_b({r15, 0, 0}, 0.04, f);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  double prev = 1.0;
  for (double t = 1.0; t <= 2.0; t += 0.01) {
    const double v = cutoff_b({std::sqrt(t * 0.04 * 3.0), 0, 0}, 0.04, f);
    REQUIRE(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("both cutoff kinds honour plateau and support") {
  for (CutoffKind kind : {CutoffKind::SmoothExp, CutoffKind::Smoothstep}) {
    const CutoffProfile f{kind, 1.0, 2.0};
    CHECK(f(0.0) == 1.0);
    CHECK(f(1.0) == 1.0);
    CHECK(f(-0.99) == 1.0);
    CHECK(f(2.0) == 0.0);
    CHECK(f(-3.0) == 0.0);
    CHECK(f(1.5) == doctest::Approx(0.5).epsilon(1e-12));
    double prev = 1.0;
    for (double t = 0.0; t < 2.5; t += 1e-3) {
      REQUIRE(f(t) <= prev);
      REQUIRE(std::abs(f(t) - f(-t)) == 0.0);
      prev = f(t);
    }
  }
  CHECK(parse_cutoff_kind("smoothstep") == CutoffKind::Smoothstep);
  CHECK(parse_cutoff_kind("smooth-exp") == CutoffKind::SmoothExp);
  CHECK_THROWS_AS(parse_cutoff_kind("box"), ConfigError);
  CHECK_THROWS_AS((CutoffProfile{CutoffKind::SmoothExp, 2.0, 1.0}.validate()),
                  ArgumentError);
}

TEST_CASE("half-line ramp") {
  const HalfLineProfile h{0.5};
  CHECK(h(-1.0) == 0.0);
  CHECK(h(0.0) == 0.0);
  CHECK(h(0.5) == 1.0);
  CHECK(h(3.0) == 1.0);
  double prev = 0.0;
  for (double t = 0.0; t < 0.6; t += 1e-3) {
    REQUIRE(h(t) >= prev);
    prev = h(t);
  }
  CHECK_THROWS_AS(HalfLineProfile{0.0}.validate(), ArgumentError);
}

TEST_CASE("enhancer P") {
  // p = -0.08 along the x3 axis: xi3^2 * 2/3 = 0.08.
  const double z = std::sqrt(0.12);
  CHECK(enhancer_P({0, 0, z}, 0.04) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(enhancer_P({1, 1, 1}, 0.04) == 0.0);
  const auto sampled = sample_symbol(GridSpec::cube(16), [](const Vec3& xi) {
    return enhancer_P(xi, 0.04);
  });
  for (double v : sampled) REQUIRE(v >= 0.0);
}

TEST_CASE("regularizer R") {
  CHECK(regularizer_R({0, 0, 2}, 2.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(regularizer_R({0, 0, 0}, 4.0, 1.0) == 0.0);
  const CutoffProfile f;
  CHECK(regularizer_R({0.1, 0, 0}, 2.0, 1.0, RegularizerMode::ConeGuarded, 0.5, f) == 0.0);
  CHECK(regularizer_R({3, 0, 0}, 2.0, 1.0, RegularizerMode::ConeGuarded, 0.5, f) ==
        doctest::Approx(1.0 / 9.0));
}

TEST_CASE("low-pass C") {
  const CutoffProfile f;
  CHECK(lowpass_C({0, 0, 0}, 2.0, 0.3, f) == 1.0);
  CHECK(lowpass_C({0, 0, 2 * 0.3 * 2.0}, 2.0, 0.3, f) == 0.0);
  CHECK(lowpass_C({0.29, 0, 0}, 2.0, 0.3, f) == 1.0);
  std::mt19937_64 rng(7);
  for (int ray = 0; ray < 50; ++ray) {
    Vec3 dir = random_xi(rng, 1.0);
    const double len = std::hypot(dir[0], dir[1], dir[2]);
    double prev = 1.0;
    for (double r = 0.0; r < 1.0; r += 0.005) {
      const double v = lowpass_C({dir[0] / len * r, dir[1] / len * r, dir[2] / len * r},
                                 3.0, 0.2, f);
      REQUIRE(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("half-wave T") {
  const HalfLineProfile h{0.5};
  CHECK(std::abs(halfwave_T({1, 1, 1}, h)) < 1e-15);
  CHECK(halfwave_T({0, 0, 1}, h) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5000; ++t) {
    Vec3 xi = random_xi(rng);
    if (std::abs(xi[2]) < h.ramp) continue;
    const Vec3 neg{-xi[0], -xi[1], -xi[2]};
    REQUIRE(halfwave_T(neg, h) == -halfwave_T(xi, h));
  }
}

TEST_CASE("laplacian multiplier and guarded inverse") {
  CHECK(laplacian_mult({0, 0, 0}) == 0.0);
  CHECK(laplacian_mult({1, 2, 2}) == 9.0);
  CHECK(laplacian_mult({2, 4, 4}) == 4.0 * laplacian_mult({1, 2, 2}));
  CHECK(q_inverse({0, 0, 1}, 0.0) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(q_inverse({1, 1, 1}, 0.0) == 0.0);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5000; ++t) {
    const Vec3 xi = random_xi(rng);
    const double q = q_inverse(xi, 0.01);
    if (std::abs(wave_p(xi)) > 0.01) {
      REQUIRE(q * wave_p(xi) == doctest::Approx(1.0).epsilon(1e-14));
    } else {
      REQUIRE(q == 0.0);
    }
  }
}

TEST_CASE("lattice identities hold on every grid frequency") {
  const GridSpec g(16, 16, 24, 1.0, 1.0, 0.75);
  const FrequencyGrid f(g);
  const CutoffProfile prof;
  const HalfLineProfile h{default_halfline_ramp(g)};
  for (std::size_t idx = 1; idx < g.size(); ++idx) {
    const Vec3 xi = f.at_flat(idx);
    const double D = dipole_D(xi), p = wave_p(xi), n2 = laplacian_mult(xi);
    const double rho2 = xi[0] * xi[0] + xi[1] * xi[1], z2 = 2.0 * xi[2] * xi[2];
    const bool on_cone = std::abs(rho2 - z2) <= 1e-12 * (rho2 + z2);
    REQUIRE(std::abs(p - n2 * D) <= 1e-13 * n2);
    REQUIRE((std::abs(D) <= 1e-12) == on_cone);
    REQUIRE(sign_of(p) == sign_of(D));
    const double b = cutoff_b(xi, 0.04, prof);
    REQUIRE(b + (1.0 - b) == 1.0);
    if (std::abs(p) < 0.04) REQUIRE(1.0 - b == 0.0);
    if (std::abs(p) > 0.08) REQUIRE(b == 0.0);
    // Evenness of the even symbols under the Hermitian pairing.
    const Vec3 m = f.at(mirror_index(g, g.unflat(idx)));
    if (m == Vec3{-xi[0], -xi[1], -xi[2]}) {
      REQUIRE(dipole_D(m) == D);
      REQUIRE(cutoff_b(m, 0.04, prof) == b);
      REQUIRE(regularizer_R(m, 3.0, 1.0) == regularizer_R(xi, 3.0, 1.0));
      REQUIRE(lowpass_C(m, 2.0, 0.5, prof) == lowpass_C(xi, 2.0, 0.5, prof));
      if (std::abs(xi[2]) >= h.ramp) REQUIRE(halfwave_T(m, h) == -halfwave_T(xi, h));
    }
    if (on_cone && std::abs(xi[2]) >= h.ramp) REQUIRE(std::abs(halfwave_T(xi, h)) < 1e-12);
  }
}

TEST_CASE("operator chain of the smooth TKD part collapses to b sign(p)/hbar") {
  const GridSpec g = GridSpec::cube(32);
  const FrequencyGrid f(g);
  const CutoffProfile prof;
  const double hbar = 0.04;
  for (std::size_t idx = 1; idx < g.size(); ++idx) {
    const Vec3 xi = f.at_flat(idx);
    if (wave_p(xi) == 0.0) continue;
    const double chain = enhancer_P(xi, hbar) * q_inverse(xi, 0.0) *
                         regularizer_R(xi, 2.0, 1.0) * cutoff_b(xi, hbar, prof) *
                         laplacian_mult(xi);
    const double closed = cutoff_b(xi, hbar, prof) * sign_of(wave_p(xi)) / hbar;
    REQUIRE(std::abs(chain - closed) <= 1e-12 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("symbols resolve by name") {
  SymbolContext ctx;
  for (const auto& name : symbol_names()) CHECK_NOTHROW(make_symbol(name, ctx));
  CHECK(make_symbol("D", ctx)({0, 0, 1}) == dipole_D({0, 0, 1}));
  CHECK(make_symbol("laplacian", ctx)({1, 2, 2}) == 9.0);
  CHECK_THROWS_AS(make_symbol("Z", ctx), ConfigError);
}

TEST_CASE("parameter validation") {
  SymbolParams p;
  CHECK_NOTHROW(p.validate());
  p.hbar = 0.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.K = -1.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  CHECK(default_regularizer_K(2.0, 0.3, CutoffProfile{}) == 1.0);
  CHECK(default_regularizer_K(4.0, 0.3, CutoffProfile{}) == doctest::Approx(0.09));
}
