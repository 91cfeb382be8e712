#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsm/symbols.hpp"
#include "qsm/volume.hpp"

namespace qsm {

enum class Method { Naive, TkdClassic, TkdSmooth, RReg, TEnhanced };

Method parse_method(std::string_view name);
std::string to_string(Method method);
const std::vector<Method>& all_methods();

struct ReconConfig {
  Method method = Method::TkdSmooth;
  SymbolParams params;
  CutoffProfile cutoff;
  HalfLineProfile halfline;
  double naive_floor = 1e-3;
  /// Allowed relative gap between the closed form and the operator chain.
  double consistency_tol = 1e-8;
  /// Guard for q_inverse on the operator-chain path.
  double q_guard = 0.0;

  /// Grid-dependent defaults: hbar 0.04, s 4 (2 for r-reg), m 2, M 2, eps_c
  /// from default_lowpass_eps, K from default_regularizer_K, one-cell ramp
  /// for h.
  static ReconConfig defaults(const GridSpec& grid,
                              Method method = Method::TkdSmooth);
  void validate() const;
  SymbolContext symbol_context() const;
};

struct ReconDiagnostics {
  /// Largest imaginary residue over all inverse transforms.
  double max_residue = 0.0;
  /// Largest closed-form vs operator-chain relative gap over all parts.
  double max_discrepancy = 0.0;
  /// Frequencies where the chain's q_inverse was clamped to zero.
  std::size_t guard_hits = 0;
};

struct ReconResult {
  RealVolume chi;
  std::optional<RealVolume> chi1;
  std::optional<RealVolume> chi2;
  std::optional<RealVolume> chi21;
  std::optional<RealVolume> chi22;
  ReconDiagnostics diagnostics;
};

/// Hard division with magnitude clamp: psi/D where |D| >= floor, otherwise
/// sign(D) psi / floor.
RealVolume naive_inverse(const RealVolume& psi, double floor);
/// Truncated k-space division with threshold hbar, sign(0) = 0.
RealVolume tkd_classic(const RealVolume& psi, double hbar);

ReconResult smooth_tkd(const RealVolume& psi, const ReconConfig& cfg);
ReconResult r_regularized(const RealVolume& psi, const ReconConfig& cfg);
ReconResult t_enhanced(const RealVolume& psi, const ReconConfig& cfg);

/// Dispatches on cfg.method. Naive and classic TKD return chi only.
ReconResult reconstruct(const RealVolume& psi, const ReconConfig& cfg);

/// Closed-form spectral multipliers of the split pipelines.
namespace closed_form {
/// (1 - b)/D, zero where b = 1.
double chi1(const Vec3& xi, const ReconConfig& cfg);
/// b sign(p) / hbar.
double tkd_chi2(const Vec3& xi, const ReconConfig& cfg);
/// sign(p)/hbar * K|xi|^(2-s) (1 - c) b.
double reg_chi21(const Vec3& xi, const ReconConfig& cfg);
/// sign(p)/hbar * c b |xi|^2.
double reg_chi22(const Vec3& xi, const ReconConfig& cfg);
/// t^m times reg_chi21.
double enhanced_chi21(const Vec3& xi, const ReconConfig& cfg);
}  // namespace closed_form

/// Symbol chains whose pointwise product equals each closed form.
namespace chains {
std::vector<std::string> chi1();
std::vector<std::string> tkd_chi2();
std::vector<std::string> reg_chi21();
std::vector<std::string> reg_chi22();
std::vector<std::string> enhanced_chi21(int m);
}  // namespace chains

/// Product of the named symbols, sampled on the lattice. Throws ConfigError
/// on an unknown name.
std::vector<double> compose_multiplier(const GridSpec& grid,
                                       const std::vector<std::string>& names,
                                       const SymbolContext& ctx);

/// Applies the product multiplier of `names` once and inverts.
RealVolume compose_pipeline(const RealVolume& psi,
                            const std::vector<std::string>& names,
                            const SymbolContext& ctx);

/// Applies each named symbol in turn to the spectrum.
SpectralVolume apply_chain(const SpectralVolume& spectrum,
                           const std::vector<std::string>& names,
                           const SymbolContext& ctx);

/// Relative L2 gap between two spectra restricted to frequencies with
/// |p| > guard.
double off_guard_discrepancy(const SpectralVolume& a, const SpectralVolume& b,
                             double guard);

}  // namespace qsm
