#include "qsm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsm/error.hpp"
#include "qsm/fft.hpp"
#include "qsm/phantom.hpp"

namespace qsm {

namespace {

int wrapped_offset(int d, int n) {
  d %= n;
  if (d < -n / 2) d += n;
  if (d >= n / 2) d -= n;
  return d;
}

int wrap_coord(int c, int n) { return ((c % n) + n) % n; }

}  // namespace

SupportMask SupportMask::from_flags(const GridSpec& grid,
                                    std::vector<std::uint8_t> inside,
                                    int dilation) {
  if (inside.size() != grid.size()) {
    throw ArgumentError("mask length does not match grid");
  }
  if (dilation < 0) throw ArgumentError("dilation must be >= 0");
  if (dilation == 0) return SupportMask(grid, std::move(inside), 0);

  std::vector<Index3> ball;
  for (int dz = -dilation; dz <= dilation; ++dz)
    for (int dy = -dilation; dy <= dilation; ++dy)
      for (int dx = -dilation; dx <= dilation; ++dx)
        if (dx * dx + dy * dy + dz * dz <= dilation * dilation)
          ball.push_back({dx, dy, dz});

  std::vector<std::uint8_t> grown(inside);
  for (std::size_t idx = 0; idx < inside.size(); ++idx) {
    if (!inside[idx]) continue;
    const Index3 v = grid.unflat(idx);
    // Only voxels with an outside face-neighbour can grow the set.
    bool boundary = false;
    const Index3 faces[6] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                             {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    for (const auto& f : faces) {
      const Index3 w{wrap_coord(v.i + f.i, grid.n(0)),
                     wrap_coord(v.j + f.j, grid.n(1)),
                     wrap_coord(v.k + f.k, grid.n(2))};
      if (!inside[grid.flat(w)]) {
        boundary = true;
        break;
      }
    }
    if (!boundary) continue;
    for (const auto& o : ball) {
      const Index3 w{wrap_coord(v.i + o.i, grid.n(0)),
                     wrap_coord(v.j + o.j, grid.n(1)),
                     wrap_coord(v.k + o.k, grid.n(2))};
      grown[grid.flat(w)] = 1;
    }
  }
  return SupportMask(grid, std::move(grown), dilation);
}

SupportMask SupportMask::from_truth(const RealVolume& truth, int dilation) {
  std::vector<std::uint8_t> inside(truth.size());
  for (std::size_t i = 0; i < inside.size(); ++i) {
    inside[i] = std::abs(truth[i]) > 0.0 ? 1 : 0;
  }
  return from_flags(truth.grid(), std::move(inside), dilation);
}

std::size_t SupportMask::count() const {
  return static_cast<std::size_t>(
      std::count(inside_.begin(), inside_.end(), std::uint8_t{1}));
}

double rmse_inside(const RealVolume& recon, const RealVolume& truth,
                   const SupportMask& mask) {
  require_same_grid(recon.grid(), truth.grid(), "rmse_inside");
  require_same_grid(recon.grid(), mask.grid(), "rmse_inside");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!mask.inside(i)) continue;
    sum += recon[i] - truth[i];
    ++n;
  }
  if (n == 0) return 0.0;
  const double offset = sum / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!mask.inside(i)) continue;
    const double d = recon[i] - truth[i] - offset;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double streak_energy(const RealVolume& recon, const SupportMask& mask) {
  require_same_grid(recon.grid(), mask.grid(), "streak_energy");
  double acc = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!mask.inside(i)) acc += recon[i] * recon[i];
  }
  return std::sqrt(acc);
}

double cone_distance(const GridSpec& grid, const Index3& apex, const Index3& v) {
  const double dx = wrapped_offset(v.i - apex.i, grid.n(0));
  const double dy = wrapped_offset(v.j - apex.j, grid.n(1));
  const double dz = wrapped_offset(v.k - apex.k, grid.n(2));
  const double rho = std::sqrt(dx * dx + dy * dy);
  // Generator lines |z| = sqrt2 * rho in the (rho, |z|) half-plane.
  return std::abs(std::numbers::sqrt2 * rho - std::abs(dz)) / std::sqrt(3.0);
}

double cone_fraction(const RealVolume& vol, const Index3& apex,
                     double halfwidth) {
  if (!(halfwidth >= 1.0)) throw ArgumentError("cone halfwidth must be >= 1");
  const GridSpec& grid = vol.grid();
  if (!grid.contains(apex)) throw ArgumentError("cone apex outside grid");
  double total = 0.0;
  double shell = 0.0;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const double e = vol[i] * vol[i];
    total += e;
    if (cone_distance(grid, apex, grid.unflat(i)) <= halfwidth) shell += e;
  }
  return total > 0.0 ? shell / total : 0.0;
}

double cone_shell_fraction(const GridSpec& grid, const Index3& apex,
                           double halfwidth) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (cone_distance(grid, apex, grid.unflat(i)) <= halfwidth) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(grid.size());
}

double g_kernel(const Vec3& x, double mollify_eps) {
  const double rho2 = x[0] * x[0] + x[1] * x[1];
  const double z2 = x[2] * x[2];
  if (!(2.0 * rho2 < z2)) return 0.0;
  return 3.0 / (4.0 * std::numbers::pi *
                std::sqrt(z2 - 2.0 * rho2 + mollify_eps * mollify_eps));
}

GKernelReport g_kernel_oracle(const GridSpec& grid, const GKernelOptions& opts) {
  if (!(opts.mollify_eps > 0.0)) throw ArgumentError("mollify_eps must be positive");
  if (!(opts.band > 0.0 && opts.band < 1.0)) throw ArgumentError("band must lie in (0, 1)");
  if (opts.refine < 1 || opts.subsample < 1) {
    throw ArgumentError("refine and subsample must be >= 1");
  }
  const int r = opts.refine;
  const GridSpec fine(grid.n(0) * r, grid.n(1) * r, grid.n(2) * r,
                      grid.spacing(0) / r, grid.spacing(1) / r,
                      grid.spacing(2) / r);
  Vec3 h{}, half_box{};
  for (int a = 0; a < 3; ++a) {
    h[a] = fine.spacing(a);
    half_box[a] = 0.5 * grid.n(a) * grid.spacing(a);
  }
  const double eps = opts.mollify_eps * std::cbrt(grid.spacing(0) * grid.spacing(1) *
                                                  grid.spacing(2));
  const int m = opts.subsample;

  std::vector<double> samples(fine.size());
  for (std::size_t idx = 0; idx < samples.size(); ++idx) {
    const Index3 v = fine.unflat(idx);
    const Vec3 c{wrap_index(v.i, fine.n(0)) * h[0], wrap_index(v.j, fine.n(1)) * h[1],
                 wrap_index(v.k, fine.n(2)) * h[2]};
    double acc = 0.0;
    if (m == 1) {
      acc = g_kernel(c, eps);
    } else {
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          for (int q = 0; q < m; ++q) {
            const Vec3 x{c[0] + h[0] * ((a + 0.5) / m - 0.5),
                         c[1] + h[1] * ((b + 0.5) / m - 0.5),
                         c[2] + h[2] * ((q + 0.5) / m - 0.5)};
            acc += g_kernel(x, eps);
          }
        }
      }
      acc /= static_cast<double>(m) * m * m;
    }
    if (opts.taper) {
      double t = 0.0;
      for (int a = 0; a < 3; ++a) t += (c[a] / half_box[a]) * (c[a] / half_box[a]);
      t = std::sqrt(t);
      if (t >= 1.0) {
        acc = 0.0;
      } else if (t > 0.5) {
        acc *= 0.5 * (1.0 + std::cos(std::numbers::pi * (t - 0.5) / 0.5));
      }
    }
    samples[idx] = acc * h[0] * h[1] * h[2];
  }
  const SpectralVolume fine_spectrum = forward_fft(RealVolume(fine, std::move(samples)));

  // Pull the target grid's frequencies out of the fine spectrum.
  const FrequencyGrid freqs(grid);
  std::vector<Complex> coarse(grid.size());
  for (std::size_t idx = 0; idx < coarse.size(); ++idx) {
    const Index3 v = grid.unflat(idx);
    auto lift = [&](int k, int a) {
      const int w = wrap_index(k, grid.n(a));
      return w < 0 ? w + fine.n(a) : w;
    };
    Complex val = fine_spectrum[fine.flat({lift(v.i, 0), lift(v.j, 1), lift(v.k, 2)})];
    if (m > 1) {
      const Vec3 xi = freqs.at(v);
      for (int a = 0; a < 3; ++a) {
        const double t = 0.5 * xi[a] * h[a];
        if (t != 0.0) val /= std::sin(t) / t;
      }
    }
    coarse[idx] = val;
  }
  SpectralVolume spectrum(grid, std::move(coarse));

  const auto p = sample_symbol(grid, wave_p);
  double pmax = 0.0;
  for (double v : p) pmax = std::max(pmax, std::abs(v));
  std::vector<double> dev;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i]) < opts.band * pmax) continue;
    dev.push_back(std::abs(spectrum[i] * p[i] - 1.0));
  }
  double median = std::numeric_limits<double>::quiet_NaN();
  double mean = median;
  if (!dev.empty()) {
    auto mid = dev.begin() + static_cast<std::ptrdiff_t>(dev.size() / 2);
    std::nth_element(dev.begin(), mid, dev.end());
    median = *mid;
    double s = 0.0;
    for (double d : dev) s += d;
    mean = s / static_cast<double>(dev.size());
  }
  return {std::move(spectrum), median, mean, dev.size()};
}

MetricsReport measure(const std::string& method, const RealVolume& recon,
                      const RealVolume& truth, const RealVolume& cone_source,
                      const MetricOptions& opts) {
  const auto support = SupportMask::from_truth(truth, 0);
  const auto dilated = SupportMask::from_truth(truth, opts.dilation);
  MetricsReport r;
  r.method = method;
  r.rmse_inside = rmse_inside(recon, truth, support);
  r.streak_energy = streak_energy(recon, dilated);
  if (opts.apex) {
    r.cone_fraction = cone_fraction(cone_source, *opts.apex, opts.cone_halfwidth);
    r.shell_fraction =
        cone_shell_fraction(truth.grid(), *opts.apex, opts.cone_halfwidth);
  }
  return r;
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> SuiteReport::offenders() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

const std::vector<std::string>& consistency_check_names() {
  static const std::vector<std::string> names = {
      "chi1-identity",        "tkd-chi2-identity",   "tkd-error-formula",
      "tkd-closed-vs-chain",  "rreg-closed-vs-chain", "tenh-closed-vs-chain",
      "split-exactness"};
  return names;
}

SuiteReport consistency_suite(const SuiteConfig& cfg) {
  const auto& names = cfg.checks ? *cfg.checks : consistency_check_names();
  for (const auto& n : names) {
    if (std::find(consistency_check_names().begin(),
                  consistency_check_names().end(),
                  n) == consistency_check_names().end()) {
      throw ConfigError("unknown consistency check '" + n + "'");
    }
  }
  SuiteReport report;
  if (names.empty()) return report;

  ReconConfig base = cfg.recon ? *cfg.recon : ReconConfig::defaults(cfg.grid);
  // Gaps are collected here and judged below rather than thrown.
  base.consistency_tol = std::numeric_limits<double>::infinity();

  const RealVolume chi = rasterize_phantom(shepp_logan_3d(), cfg.grid);
  const RealVolume psi = forward_model(chi);
  const SpectralVolume chi_hat = forward_fft(chi);
  const double hbar = base.params.hbar;

  ReconConfig tkd_cfg = base;
  tkd_cfg.method = Method::TkdSmooth;
  const ReconResult tkd = smooth_tkd(psi, tkd_cfg);

  auto add = [&](const std::string& name, double residual, double tol) {
    if (std::find(names.begin(), names.end(), name) == names.end()) return;
    const double t = cfg.tolerance ? *cfg.tolerance : tol;
    report.checks.push_back({name, residual, t, residual <= t});
  };
  auto wants = [&](const char* name) {
    return std::find(names.begin(), names.end(), name) != names.end();
  };

  if (wants("chi1-identity")) {
    const auto expected = apply_multiplier(chi_hat, [&](const Vec3& xi) {
      return 1.0 - cutoff_b(xi, hbar, base.cutoff);
    });
    add("chi1-identity", relative_l2(forward_fft(*tkd.chi1), expected), 1e-10);
  }
  if (wants("tkd-chi2-identity")) {
    const auto expected = apply_multiplier(chi_hat, [&](const Vec3& xi) {
      return cutoff_b(xi, hbar, base.cutoff) * std::abs(dipole_D(xi)) / hbar;
    });
    add("tkd-chi2-identity", relative_l2(forward_fft(*tkd.chi2), expected),
        1e-10);
  }
  if (wants("tkd-error-formula")) {
    const auto err_hat = apply_multiplier(chi_hat, [&](const Vec3& xi) {
      return cutoff_b(xi, hbar, base.cutoff) *
             (1.0 - std::abs(dipole_D(xi)) / hbar);
    });
    const double predicted =
        err_hat.norm() / std::sqrt(static_cast<double>(cfg.grid.size()));
    const double measured = (tkd.chi - chi).norm();
    add("tkd-error-formula",
        predicted > 0.0 ? std::abs(measured - predicted) / predicted : measured,
        1e-8);
  }
  add("tkd-closed-vs-chain", tkd.diagnostics.max_discrepancy, 1e-8);

  if (wants("rreg-closed-vs-chain") || wants("split-exactness")) {
    ReconConfig rc = base;
    rc.method = Method::RReg;
    const ReconResult rr = r_regularized(psi, rc);
    add("rreg-closed-vs-chain", rr.diagnostics.max_discrepancy, 1e-8);
    const RealVolume parts = *rr.chi1 + *rr.chi21 + *rr.chi22;
    const double split = std::max(relative_l2(parts, rr.chi),
                                  relative_l2(*tkd.chi1 + *tkd.chi2, tkd.chi));
    add("split-exactness", split, 1e-12);
  }
  if (wants("tenh-closed-vs-chain")) {
    ReconConfig tc = base;
    tc.method = Method::TEnhanced;
    if (tc.params.m % 2 != 0) tc.params.m += 1;
    const ReconResult te = t_enhanced(psi, tc);
    add("tenh-closed-vs-chain", te.diagnostics.max_discrepancy, 1e-8);
  }
  return report;
}

}  // namespace qsm
