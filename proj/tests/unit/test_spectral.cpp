#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "qsm/error.hpp"
#include "qsm/fft.hpp"
#include "qsm/grid.hpp"
#include "qsm/symbols.hpp"
#include "support.hpp"

using namespace qsm;
using qsm::testing::random_volume;

TEST_CASE("grid rejects odd, tiny and non-positive specs") {
  CHECK_THROWS_AS(GridSpec(7, 8, 8), ArgumentError);
  CHECK_THROWS_AS(GridSpec(2, 8, 8), ArgumentError);
  CHECK_THROWS_AS(GridSpec(8, 8, 8, 1.0, 0.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(GridSpec(8, 8, 8, 1.0, 1.0, -2.0), ArgumentError);
  CHECK_NOTHROW(GridSpec(4, 6, 8, 0.5, 1.0, 2.0));
}

TEST_CASE("frequency_at on the 8^3 unit grid") {
  const GridSpec g = GridSpec::cube(8);
  const Vec3 dc = frequency_at(g, {0, 0, 0});
  CHECK(dc == Vec3{0.0, 0.0, 0.0});
  const Vec3 one = frequency_at(g, {1, 0, 0});
  CHECK(one[0] == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
  CHECK(one[1] == 0.0);
  const Vec3 nyq = frequency_at(g, {4, 0, 0});
  CHECK(nyq[0] == doctest::Approx(-std::numbers::pi).epsilon(1e-15));
  CHECK_THROWS_AS(frequency_at(g, {8, 0, 0}), ArgumentError);
  CHECK_THROWS_AS(frequency_at(g, {0, -1, 0}), ArgumentError);
}

TEST_CASE("frequency lattice pairs xi(k) with -xi(n-k) away from Nyquist") {
  const GridSpec g(8, 10, 12, 1.0, 0.5, 2.0);
  const FrequencyGrid f(g);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Index3 k = g.unflat(idx);
    if (k.i == 4 || k.j == 5 || k.k == 6) continue;
    const Vec3 a = f.at(k);
    const Vec3 b = f.at(mirror_index(g, k));
    for (int ax = 0; ax < 3; ++ax) REQUIRE(a[ax] == -b[ax]);
    REQUIRE(a == frequency_at(g, k));
  }
  CHECK(f.max_norm() > 0.0);
}

TEST_CASE("forward then inverse FFT is the identity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const GridSpec g(8, 12, 16, 1.0, 0.7, 1.3);
    const RealVolume v = random_volume(g, seed);
    const auto back = inverse_fft_measured(forward_fft(v));
    CHECK(relative_l2(back.volume, v) < 1e-12);
    CHECK(back.residue < 1e-14);
  }
}

TEST_CASE("forward FFT of a real field is Hermitian") {
  const GridSpec g = GridSpec::cube(16);
  const SpectralVolume s = forward_fft(random_volume(g, 11));
  double worst = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Complex a = s[idx];
    const Complex b = s.at(mirror_index(g, g.unflat(idx)));
    worst = std::max(worst, std::abs(a - std::conj(b)));
  }
  CHECK(worst / s.norm() < 1e-12);
}

TEST_CASE("Parseval with the unnormalized forward transform") {
  const GridSpec g = GridSpec::cube(16);
  for (std::uint64_t seed = 20; seed < 24; ++seed) {
    const RealVolume v = random_volume(g, seed);
    const double lhs = v.norm() * v.norm();
    const double rhs = forward_fft(v).norm() * forward_fft(v).norm() / g.size();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("FFT is linear") {
  const GridSpec g = GridSpec::cube(8);
  const RealVolume a = random_volume(g, 5), b = random_volume(g, 6);
  const SpectralVolume lhs = forward_fft(2.5 * a + (-0.75) * b);
  std::vector<Complex> rhs(g.size());
  const SpectralVolume fa = forward_fft(a), fb = forward_fft(b);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = 2.5 * fa[i] - 0.75 * fb[i];
  CHECK(relative_l2(lhs, SpectralVolume(g, rhs)) < 1e-13);
}

TEST_CASE("constant field has all of its energy at DC") {
  const GridSpec g = GridSpec::cube(8);
  const SpectralVolume s = forward_fft(RealVolume::constant(g, 2.0));
  CHECK(s[0].real() == doctest::Approx(2.0 * g.size()));
  double rest = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) rest += std::abs(s[i]);
  CHECK(rest < 1e-9);
}

TEST_CASE("inverse FFT rejects a non-Hermitian spectrum") {
  const GridSpec g = GridSpec::cube(8);
  std::vector<Complex> data(g.size(), Complex{0.0, 0.0});
  data[g.flat({1, 0, 0})] = Complex{1.0, 0.0};
  const SpectralVolume s(g, data);
  CHECK_THROWS_AS(inverse_fft(s), SymmetryError);
  try {
    inverse_fft(s);
  } catch (const SymmetryError& e) {
    CHECK(e.residue() > 0.5);
  }
  // A loose enough tolerance lets it through.
  CHECK_NOTHROW(inverse_fft(s, 1.0));
}

TEST_CASE("even multipliers keep fields real and commute") {
  const GridSpec g = GridSpec::cube(16);
  const SpectralVolume s = forward_fft(random_volume(g, 9));
  const Symbol d = dipole_D;
  const Symbol lap = laplacian_mult;
  const SpectralVolume ab = apply_multiplier(apply_multiplier(s, d), lap);
  const SpectralVolume ba = apply_multiplier(apply_multiplier(s, lap), d);
  CHECK(relative_l2(ab, ba) < 1e-15);
  const auto out = inverse_fft_measured(ab);
  CHECK(out.residue < 1e-12);
}

TEST_CASE("sampled and functional multipliers agree") {
  const GridSpec g = GridSpec::cube(8);
  const SpectralVolume s = forward_fft(random_volume(g, 4));
  const auto sampled = sample_symbol(g, wave_p);
  CHECK(relative_l2(apply_multiplier(s, sampled), apply_multiplier(s, wave_p)) == 0.0);
  CHECK_THROWS_AS(apply_multiplier(s, std::span<const double>(sampled.data(), 3)),
                  ArgumentError);
}

TEST_CASE("a symbol that blows up is reported with its lattice index") {
  const GridSpec g = GridSpec::cube(8);
  const Symbol bad = [](const Vec3& xi) {
    return xi[0] == 0.0 && xi[1] == 0.0 && xi[2] == 0.0
               ? std::numeric_limits<double>::infinity()
               : 1.0;
  };
  CHECK_THROWS_AS(sample_symbol(g, bad), SymbolDomainError);
  try {
    sample_symbol(g, bad);
  } catch (const SymbolDomainError& e) {
    CHECK(e.flat_index() == 0u);
  }
}

TEST_CASE("volumes validate their payload") {
  const GridSpec g = GridSpec::cube(4);
  CHECK_THROWS_AS(RealVolume(g, std::vector<double>(10)), ArgumentError);
  std::vector<double> nan(g.size(), 0.0);
  nan[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(RealVolume(g, nan), NumericError);
  CHECK_THROWS_AS(RealVolume::zeros(g) + RealVolume::zeros(GridSpec::cube(6)),
                  ArgumentError);
}
