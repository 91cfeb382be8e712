#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "qsm/analysis.hpp"
#include "qsm/error.hpp"
#include "qsm/fft.hpp"
#include "qsm/phantom.hpp"
#include "qsm/recon.hpp"
#include "support.hpp"

using namespace qsm;
using qsm::testing::impulse;
using qsm::testing::random_volume;

namespace {

struct Scene {
  GridSpec grid;
  RealVolume chi;
  RealVolume psi;
  RealVolume spiked;
};

Scene make_scene(int n) {
  const GridSpec g = GridSpec::cube(n);
  RealVolume chi = rasterize_phantom(shepp_logan_3d(), g);
  RealVolume psi = forward_model(chi);
  const Index3 at{n * 5 / 8, n / 2, n * 21 / 32};
  RealVolume spiked = perturb(psi, {{{at, default_spike_amplitude(psi)}}, 0.0, 0});
  return {g, std::move(chi), std::move(psi), std::move(spiked)};
}

const Scene& scene64() {
  static const Scene s = make_scene(64);
  return s;
}

// Spectrum of `v` compared against `multiplier * ref_hat` on the lattice.
double multiplier_gap(const RealVolume& v, const SpectralVolume& ref_hat,
                      const std::function<double(const Vec3&)>& multiplier) {
  const GridSpec& g = v.grid();
  const SpectralVolume got = forward_fft(v);
  const FrequencyGrid f(g);
  std::vector<Complex> want(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) want[i] = multiplier(f.at_flat(i)) * ref_hat[i];
  return relative_l2(got, SpectralVolume(g, want));
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("tikhonov"), ConfigError);
}

TEST_CASE("classic TKD of an impulse has the truncated-division spectrum") {
  const GridSpec g = GridSpec::cube(16);
  const double hbar = 0.1;
  const RealVolume out = tkd_classic(impulse(g, {0, 0, 0}), hbar);
  const SpectralVolume s = forward_fft(out);
  const FrequencyGrid f(g);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = dipole_D(f.at_flat(i));
    const double want = std::abs(d) >= hbar ? 1.0 / d : sign_of(d) / hbar;
    worst = std::max(worst, std::abs(s[i] - want));
  }
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(tkd_classic(impulse(g, {0, 0, 0}), 0.0), ArgumentError);
}

TEST_CASE("naive inverse recovers chi exactly where D is large") {
  const GridSpec g = GridSpec::cube(16);
  const RealVolume chi = random_volume(g, 3);
  const RealVolume back = naive_inverse(forward_model(chi), 1e-3);
  const SpectralVolume a = forward_fft(back), b = forward_fft(chi);
  const FrequencyGrid f(g);
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (std::abs(dipole_D(f.at_flat(i))) < 1e-3) continue;
    REQUIRE(std::abs(a[i] - b[i]) < 1e-9 * (1.0 + std::abs(b[i])));
  }
}

TEST_CASE("smooth TKD on clean data") {
  const GridSpec g = GridSpec::cube(32);
  const RealVolume chi = rasterize_phantom(shepp_logan_3d(), g);
  const RealVolume psi = forward_model(chi);
  const ReconConfig cfg = ReconConfig::defaults(g);
  const ReconResult r = smooth_tkd(psi, cfg);
  REQUIRE(r.chi1);
  REQUIRE(r.chi2);
  const SpectralVolume chi_hat = forward_fft(chi);

  // chi1 = (1 - b) chi away from D = 0, which the lattice samples only at DC
  // and on the exact cone; both carry b = 1.
  CHECK(multiplier_gap(*r.chi1, chi_hat, [&](const Vec3& xi) {
          return 1.0 - cutoff_b(xi, cfg.params.hbar, cfg.cutoff);
        }) < 1e-10);
  // chi2 = b sign(p) D chi / hbar = b |D| chi / hbar.
  CHECK(multiplier_gap(*r.chi2, chi_hat, [&](const Vec3& xi) {
          return cutoff_b(xi, cfg.params.hbar, cfg.cutoff) *
                 std::abs(dipole_D(xi)) / cfg.params.hbar;
        }) < 1e-10);
  // The two parts are exactly the full result.
  CHECK(relative_l2(*r.chi1 + *r.chi2, r.chi) < 1e-12);
  CHECK(r.diagnostics.max_discrepancy < 1e-8);
  CHECK(r.diagnostics.max_residue < 1e-10);
}

TEST_CASE("the TKD error is (b - b|D|/hbar) applied to chi") {
  const GridSpec g = GridSpec::cube(32);
  const RealVolume chi = rasterize_phantom(shepp_logan_3d(), g);
  const ReconConfig cfg = ReconConfig::defaults(g);
  const ReconResult r = smooth_tkd(forward_model(chi), cfg);
  const RealVolume err = chi - r.chi;
  // DC of chi is not recoverable: b(0) = 1 and p(0) = 0.
  CHECK(multiplier_gap(err, forward_fft(chi), [&](const Vec3& xi) {
          const double b = cutoff_b(xi, cfg.params.hbar, cfg.cutoff);
          return b - b * std::abs(dipole_D(xi)) / cfg.params.hbar;
        }) < 1e-10);
}

TEST_CASE("every split method is linear and maps zero to zero") {
  const GridSpec g = GridSpec::cube(16);
  for (Method m : all_methods()) {
    const ReconConfig cfg = ReconConfig::defaults(g, m);
    CHECK(reconstruct(RealVolume::zeros(g), cfg).chi.max_abs() == 0.0);
    const RealVolume a = forward_model(random_volume(g, 40));
    const RealVolume b = forward_model(random_volume(g, 41));
    const RealVolume lhs = reconstruct(2.0 * a + (-1.0) * b, cfg).chi;
    const RealVolume rhs =
        2.0 * reconstruct(a, cfg).chi + (-1.0) * reconstruct(b, cfg).chi;
    CHECK(relative_l2(lhs, rhs) < 1e-10);
  }
}

TEST_CASE("split parts sum to the reconstruction") {
  const GridSpec g = GridSpec::cube(16);
  const RealVolume psi = forward_model(random_volume(g, 12));
  for (Method m : {Method::RReg, Method::TEnhanced}) {
    const ReconResult r = reconstruct(psi, ReconConfig::defaults(g, m));
    REQUIRE(r.chi1);
    REQUIRE(r.chi21);
    REQUIRE(r.chi22);
    CHECK(relative_l2(*r.chi21 + *r.chi22, *r.chi2) < 1e-12);
    CHECK(relative_l2(*r.chi1 + *r.chi2, r.chi) < 1e-12);
  }
}

TEST_CASE("r-reg with C switched off and s = 2 is smooth TKD") {
  const GridSpec g = GridSpec::cube(16);
  const RealVolume psi = forward_model(random_volume(g, 5));
  ReconConfig cfg = ReconConfig::defaults(g, Method::RReg);
  cfg.params.eps_c = 1e-9;  // C vanishes on every nonzero lattice frequency
  cfg.params.K = 1.0;
  cfg.params.s = 2.0;
  const ReconResult reg = r_regularized(psi, cfg);
  const ReconResult tkd = smooth_tkd(psi, ReconConfig::defaults(g));
  CHECK(relative_l2(reg.chi, tkd.chi) < 1e-10);
  CHECK(reg.chi22->max_abs() <= 1e-12 * reg.chi.max_abs());
}

TEST_CASE("r-reg with C covering the lattice gives the |xi|^2-weighted TKD part") {
  const GridSpec g = GridSpec::cube(16);
  const RealVolume psi = forward_model(random_volume(g, 6));
  ReconConfig cfg = ReconConfig::defaults(g, Method::RReg);
  cfg.params.eps_c = 1e6;
  const ReconResult reg = r_regularized(psi, cfg);
  const ReconResult tkd = smooth_tkd(psi, ReconConfig::defaults(g));
  CHECK(reg.chi21->max_abs() < 1e-12 * reg.chi22->max_abs());
  CHECK(multiplier_gap(*reg.chi22, forward_fft(*tkd.chi2), laplacian_mult) < 1e-10);
}

TEST_CASE("t-enhanced with m = 0 is r-reg") {
  const GridSpec g = GridSpec::cube(16);
  const RealVolume psi = forward_model(random_volume(g, 7));
  ReconConfig cfg = ReconConfig::defaults(g, Method::TEnhanced);
  cfg.params.m = 0;
  ReconConfig reg = cfg;
  reg.method = Method::RReg;
  CHECK(relative_l2(t_enhanced(psi, cfg).chi, r_regularized(psi, reg).chi) < 1e-12);
}

TEST_CASE("t-enhanced rejects odd powers and r-reg rejects s < 2") {
  const GridSpec g = GridSpec::cube(8);
  const RealVolume psi = RealVolume::zeros(g);
  ReconConfig cfg = ReconConfig::defaults(g, Method::TEnhanced);
  cfg.params.m = 3;
  CHECK_THROWS_AS(t_enhanced(psi, cfg), ArgumentError);
  ReconConfig reg = ReconConfig::defaults(g, Method::RReg);
  reg.params.s = 1.5;
  CHECK_THROWS_AS(r_regularized(psi, reg), ArgumentError);
}

TEST_CASE("the enhancer vanishes on the cone") {
  const GridSpec g = GridSpec::cube(16);
  const ReconConfig cfg = ReconConfig::defaults(g, Method::TEnhanced);
  // xi3 = sqrt2 rho exactly: T = 0 and so is the enhanced chi21 multiplier.
  const Vec3 on{1.0, 0.0, std::sqrt(2.0)};
  CHECK(std::abs(closed_form::enhanced_chi21(on, cfg)) < 1e-12);
  const Vec3 below{-0.5, 0.5, -std::sqrt(2.0) * std::hypot(0.5, 0.5)};
  CHECK(std::abs(closed_form::enhanced_chi21(below, cfg)) < 1e-12);
}

TEST_CASE("closed forms equal their symbol chains pointwise") {
  const GridSpec g = GridSpec::cube(16);
  ReconConfig cfg = ReconConfig::defaults(g, Method::TEnhanced);
  const SymbolContext ctx = cfg.symbol_context();
  std::mt19937_64 rng(99);
  for (int t = 0; t < 2000; ++t) {
    const Vec3 xi = qsm::testing::random_xi(rng);
    if (std::abs(wave_p(xi)) < 1e-6) continue;
    auto product = [&](const std::vector<std::string>& names) {
      double v = 1.0;
      for (const auto& n : names) v *= make_symbol(n, ctx)(xi);
      return v;
    };
    const double c1 = closed_form::chi1(xi, cfg);
    REQUIRE(product(chains::chi1()) == doctest::Approx(c1).epsilon(1e-10).scale(1.0));
    const double c21 = closed_form::reg_chi21(xi, cfg);
    REQUIRE(product(chains::reg_chi21()) ==
            doctest::Approx(c21).epsilon(1e-10).scale(1.0));
    const double c22 = closed_form::reg_chi22(xi, cfg);
    REQUIRE(product(chains::reg_chi22()) ==
            doctest::Approx(c22).epsilon(1e-10).scale(1.0));
    const double ce = closed_form::enhanced_chi21(xi, cfg);
    REQUIRE(product(chains::enhanced_chi21(cfg.params.m)) ==
            doctest::Approx(ce).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("compose_pipeline") {
  const GridSpec g = GridSpec::cube(16);
  const RealVolume psi = forward_model(random_volume(g, 13));
  const SymbolContext ctx = ReconConfig::defaults(g).symbol_context();
  CHECK(relative_l2(compose_pipeline(psi, {}, ctx), psi) < 1e-13);
  const RealVolume bb = compose_pipeline(psi, {"b", "b"}, ctx);
  const RealVolume once = compose_pipeline(psi, {"b"}, ctx);
  CHECK(relative_l2(bb, compose_pipeline(once, {"b"}, ctx)) < 1e-12);
  CHECK_THROWS_AS(compose_pipeline(psi, {"b", "nope"}, ctx), ConfigError);

  // laplacian * qinv is 1/D off the set where p vanishes.
  const SpectralVolume via_chain = apply_chain(forward_fft(psi), {"laplacian", "qinv"}, ctx);
  const SpectralVolume ps = forward_fft(psi);
  const FrequencyGrid f(g);
  std::vector<Complex> direct(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = dipole_D(f.at_flat(i));
    direct[i] = d == 0.0 ? Complex{} : ps[i] / d;
  }
  CHECK(off_guard_discrepancy(via_chain, SpectralVolume(g, direct), 1e-12) < 1e-12);
}

TEST_CASE("regularization ordering at 64^3") {
  const Scene& sc = scene64();
  const SupportMask mask = SupportMask::from_truth(sc.chi, 3);
  auto energy = [&](const ReconConfig& cfg) {
    return streak_energy(reconstruct(sc.spiked, cfg).chi, mask);
  };
  ReconConfig s2 = ReconConfig::defaults(sc.grid, Method::RReg);
  ReconConfig s4 = s2;
  s4.params.s = 4.0;
  s4.params.K = default_regularizer_K(4.0, s4.params.eps_c, s4.cutoff);
  const double e2 = energy(s2), e4 = energy(s4);
  MESSAGE("r-reg streak s=2 ", e2, ", s=4 ", e4);
  CHECK(e4 < e2);

  ReconConfig te = s4;
  te.method = Method::TEnhanced;
  const ReconResult rt = reconstruct(sc.spiked, te);
  const ReconResult r4 = reconstruct(sc.spiked, s4);
  const SupportMask bare = SupportMask::from_truth(sc.chi, 0);
  const double rm_t = rmse_inside(rt.chi, sc.chi, bare);
  const double rm_r = rmse_inside(r4.chi, sc.chi, bare);
  MESSAGE("t-enhanced streak ", streak_energy(rt.chi, mask), " rmse ", rm_t,
          "; r-reg(s=4) rmse ", rm_r);
  CHECK(streak_energy(rt.chi, mask) < e4);
  CHECK(rm_t <= 1.05 * rm_r);
}

TEST_CASE("naive inversion: spike-driven streaks, pinned as measured") {
  // The lattice carries frequencies on or near the cone even for clean data,
  // so the clean naive result already streaks; the spike multiplies it by
  // about four at this size rather than by an order of magnitude.
  const Scene& sc = scene64();
  const SupportMask mask = SupportMask::from_truth(sc.chi, 3);
  const double clean = streak_energy(naive_inverse(sc.psi, 1e-3), mask);
  const double spiked = streak_energy(naive_inverse(sc.spiked, 1e-3), mask);
  MESSAGE("naive clean ", clean, ", spiked ", spiked);
  CHECK(spiked > 3.0 * clean);
}

TEST_CASE("chi1 keeps the spike away from the cone") {
  const Scene& sc = scene64();
  const SupportMask mask = SupportMask::from_truth(sc.chi, 3);
  const RealVolume spike_only = sc.spiked - sc.psi;
  const ReconConfig cfg = ReconConfig::defaults(sc.grid);
  const double naive_spike =
      streak_energy(naive_inverse(spike_only, 1e-3), mask);
  const double chi1_spike = streak_energy(*smooth_tkd(spike_only, cfg).chi1, mask);
  MESSAGE("spike-induced streak: naive ", naive_spike, ", chi1 ", chi1_spike);
  CHECK(chi1_spike < 0.25 * naive_spike);

  // A wider cutoff band keeps more of the spike out of chi1.
  double previous = chi1_spike;
  for (double hbar : {0.08, 0.16}) {
    ReconConfig wide = cfg;
    wide.params.hbar = hbar;
    const double e = streak_energy(*smooth_tkd(spike_only, wide).chi1, mask);
    CHECK(e < previous);
    previous = e;
  }
}
