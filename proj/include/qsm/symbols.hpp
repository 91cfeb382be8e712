#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qsm/fft.hpp"
#include "qsm/grid.hpp"

namespace qsm {

enum class CutoffKind { SmoothExp, Smoothstep };

/// Even cutoff f(t): 1 on |t| <= inner, 0 on |t| >= outer, monotone between.
struct CutoffProfile {
  CutoffKind kind = CutoffKind::SmoothExp;
  double inner = 1.0;
  double outer = 2.0;

  void validate() const;
  double operator()(double t) const;
  /// The same profile shape with a different support edge.
  CutoffProfile with_outer(double new_outer) const {
    return {kind, inner, new_outer};
  }
};

/// Ramp h(t): 0 for t <= 0, 1 for t >= ramp.
struct HalfLineProfile {
  double ramp = 1.0;

  void validate() const;
  double operator()(double t) const;
};

struct SymbolParams {
  double hbar = 0.04;
  double s = 4.0;
  int m = 2;
  double bigM = 2.0;
  double eps_c = 1.0;
  double K = 1.0;

  void validate() const;
};

CutoffKind parse_cutoff_kind(std::string_view name);
std::string to_string(CutoffKind kind);

// Dipole kernel 1/3 - xi3^2/|xi|^2, with D(0) = 0.
double dipole_D(const Vec3& xi);
// Wave symbol -xi3^2 + |xi|^2/3.
double wave_p(const Vec3& xi);
// The same symbol through its light-cone factorization.
double factored_p(const Vec3& xi);
// f(p/hbar): 1 near the characteristic cone, 0 away from it.
double cutoff_b(const Vec3& xi, double hbar, const CutoffProfile& f);
// |p|/hbar, i.e. sign(p) p / hbar with sign(0) = 0.
double enhancer_P(const Vec3& xi, double hbar);

enum class RegularizerMode { Plain, ConeGuarded };

// K |xi|^-s with value 0 at the origin; the guarded form is multiplied by
// 1 - f(|xi|/eps_guard).
double regularizer_R(const Vec3& xi, double s, double K,
                     RegularizerMode mode = RegularizerMode::Plain,
                     double eps_guard = 1.0, const CutoffProfile& f = {});
// f_M(|xi|/eps_c): f's plateau with support pushed out to bigM.
double lowpass_C(const Vec3& xi, double bigM, double eps_c,
                 const CutoffProfile& f);
// h(xi3)(sqrt2 xi3 - rho) + h(-xi3)(sqrt2 xi3 + rho), rho = |(xi1, xi2)|.
double halfwave_T(const Vec3& xi, const HalfLineProfile& h);
double laplacian_mult(const Vec3& xi);
// 1/p where |p| > guard, else 0.
double q_inverse(const Vec3& xi, double guard);

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Everything needed to resolve a symbol by name.
struct SymbolContext {
  SymbolParams params;
  CutoffProfile cutoff;
  HalfLineProfile halfline;
  double q_guard = 0.0;
};

/// Names accepted by make_symbol.
const std::vector<std::string>& symbol_names();

/// Resolves "D", "p", "b", "1-b", "P", "R", "C", "1-C", "T", "laplacian",
/// "qinv". Throws ConfigError for anything else.
Symbol make_symbol(std::string_view name, const SymbolContext& ctx);

/// Default ramp width for h: one frequency cell along x3.
double default_halfline_ramp(const GridSpec& grid);
/// Default eps_c: C's plateau covers the lowest 5% of the |xi| range.
double default_lowpass_eps(const GridSpec& grid, const CutoffProfile& f);
/// Default K: (eps_c * inner)^(s - 2), so K|xi|^(2-s) is 1 at the edge of C's
/// plateau and below 1 beyond it. Equals 1 for s = 2.
double default_regularizer_K(double s, double eps_c, const CutoffProfile& f);

}  // namespace qsm
