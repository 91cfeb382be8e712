#include "qsm/symbols.hpp"

#include <cmath>
#include <numbers>

#include "qsm/error.hpp"

namespace qsm {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double bump_tail(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double norm2(const Vec3& xi) {
  return xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
}

double rho2(const Vec3& xi) { return xi[0] * xi[0] + xi[1] * xi[1]; }

}  // namespace

void CutoffProfile::validate() const {
  if (!(inner > 0.0) || !(outer > inner)) {
    throw ArgumentError("cutoff profile needs 0 < inner < outer");
  }
}

double CutoffProfile::operator()(double t) const {
  const double a = std::abs(t);
  if (a <= inner) return 1.0;
  if (a >= outer) return 0.0;
  if (kind == CutoffKind::Smoothstep) {
    // Mirrored smoothstep; 1 - S(x) can dip below zero by an ulp.
    const double y = (outer - a) / (outer - inner);
    return y * y * y * (y * (6.0 * y - 15.0) + 10.0);
  }
  const double up = bump_tail(outer - a);
  const double down = bump_tail(a - inner);
  return up / (up + down);
}

void HalfLineProfile::validate() const {
  if (!(ramp > 0.0)) throw ArgumentError("half-line ramp must be positive");
}

double HalfLineProfile::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= ramp) return 1.0;
  const double up = bump_tail(t / ramp);
  const double down = bump_tail(1.0 - t / ramp);
  return up / (up + down);
}

void SymbolParams::validate() const {
  if (!(hbar > 0.0)) throw ArgumentError("hbar must be positive");
  if (!(s > 0.0)) throw ArgumentError("s must be positive");
  if (m < 0) throw ArgumentError("m must be non-negative");
  if (!(bigM > 0.0)) throw ArgumentError("M must be positive");
  if (!(eps_c > 0.0)) throw ArgumentError("eps_c must be positive");
  if (!(K > 0.0)) throw ArgumentError("K must be positive");
}

CutoffKind parse_cutoff_kind(std::string_view name) {
  if (name == "smooth-exp") return CutoffKind::SmoothExp;
  if (name == "smoothstep") return CutoffKind::Smoothstep;
  throw ConfigError("unknown cutoff kind '" + std::string(name) +
                    "' (expected smooth-exp or smoothstep)");
}

std::string to_string(CutoffKind kind) {
  return kind == CutoffKind::SmoothExp ? "smooth-exp" : "smoothstep";
}

double wave_p(const Vec3& xi) {
  return (rho2(xi) - 2.0 * xi[2] * xi[2]) / 3.0;
}

double dipole_D(const Vec3& xi) {
  const double r2 = norm2(xi);
  if (r2 == 0.0) return 0.0;
  return wave_p(xi) / r2;
}

double factored_p(const Vec3& xi) {
  const double rho = std::sqrt(rho2(xi));
  return -(kSqrt2 * xi[2] - rho) * (kSqrt2 * xi[2] + rho) / 3.0;
}

double cutoff_b(const Vec3& xi, double hbar, const CutoffProfile& f) {
  return f(wave_p(xi) / hbar);
}

double enhancer_P(const Vec3& xi, double hbar) {
  return std::abs(wave_p(xi)) / hbar;
}

double regularizer_R(const Vec3& xi, double s, double K, RegularizerMode mode,
                     double eps_guard, const CutoffProfile& f) {
  const double r2 = norm2(xi);
  if (r2 == 0.0) return 0.0;
  const double r = std::sqrt(r2);
  double value = K * std::pow(r, -s);
  if (mode == RegularizerMode::ConeGuarded) value *= 1.0 - f(r / eps_guard);
  return value;
}

double lowpass_C(const Vec3& xi, double bigM, double eps_c,
                 const CutoffProfile& f) {
  return f.with_outer(bigM)(std::sqrt(norm2(xi)) / eps_c);
}

double halfwave_T(const Vec3& xi, const HalfLineProfile& h) {
  // sqrt2*xi3 -+ rho rewritten as (2 xi3^2 - rho^2)/(sqrt2*xi3 +- rho) on the
  // side where the denominator cannot vanish; exact zero on the cone.
  const double r2 = rho2(xi);
  const double rho = std::sqrt(r2);
  const double x3 = xi[2];
  const double diff = 2.0 * x3 * x3 - r2;
  double value = 0.0;
  if (x3 > 0.0) value += h(x3) * diff / (kSqrt2 * x3 + rho);
  if (x3 < 0.0) value += h(-x3) * diff / (kSqrt2 * x3 - rho);
  return value;
}

double laplacian_mult(const Vec3& xi) { return norm2(xi); }

double q_inverse(const Vec3& xi, double guard) {
  const double p = wave_p(xi);
  return std::abs(p) > guard ? 1.0 / p : 0.0;
}

const std::vector<std::string>& symbol_names() {
  static const std::vector<std::string> names = {
      "D", "p", "b", "1-b", "P", "R", "C", "1-C", "T", "laplacian", "qinv"};
  return names;
}

Symbol make_symbol(std::string_view name, const SymbolContext& ctx) {
  const SymbolParams& sp = ctx.params;
  if (name == "D") return dipole_D;
  if (name == "p") return wave_p;
  if (name == "b") {
    return [hbar = sp.hbar, f = ctx.cutoff](const Vec3& xi) {
      return cutoff_b(xi, hbar, f);
    };
  }
  if (name == "1-b") {
    return [hbar = sp.hbar, f = ctx.cutoff](const Vec3& xi) {
      return 1.0 - cutoff_b(xi, hbar, f);
    };
  }
  if (name == "P") {
    return [hbar = sp.hbar](const Vec3& xi) { return enhancer_P(xi, hbar); };
  }
  if (name == "R") {
    return [s = sp.s, K = sp.K](const Vec3& xi) {
      return regularizer_R(xi, s, K);
    };
  }
  if (name == "C") {
    return [M = sp.bigM, e = sp.eps_c, f = ctx.cutoff](const Vec3& xi) {
      return lowpass_C(xi, M, e, f);
    };
  }
  if (name == "1-C") {
    return [M = sp.bigM, e = sp.eps_c, f = ctx.cutoff](const Vec3& xi) {
      return 1.0 - lowpass_C(xi, M, e, f);
    };
  }
  if (name == "T") {
    return [h = ctx.halfline](const Vec3& xi) { return halfwave_T(xi, h); };
  }
  if (name == "laplacian") return laplacian_mult;
  if (name == "qinv") {
    return [g = ctx.q_guard](const Vec3& xi) { return q_inverse(xi, g); };
  }
  throw ConfigError("unknown symbol name '" + std::string(name) + "'");
}

double default_halfline_ramp(const GridSpec& grid) {
  return 2.0 * std::numbers::pi / (grid.n(2) * grid.spacing(2));
}

double default_lowpass_eps(const GridSpec& grid, const CutoffProfile& f) {
  return 0.05 * FrequencyGrid(grid).max_norm() / f.inner;
}

double default_regularizer_K(double s, double eps_c, const CutoffProfile& f) {
  return std::pow(eps_c * f.inner, s - 2.0);
}

}  // namespace qsm
