#include "qsm/recon.hpp"

#include <algorithm>
#include <cmath>

#include "qsm/error.hpp"
#include "qsm/fft.hpp"

namespace qsm {

namespace {

RealVolume thresholded_division(const RealVolume& psi, double threshold) {
  const auto multiplier = sample_symbol(psi.grid(), [threshold](const Vec3& xi) {
    const double d = dipole_D(xi);
    return std::abs(d) >= threshold ? 1.0 / d : sign_of(d) / threshold;
  });
  return inverse_fft(apply_multiplier(forward_fft(psi), multiplier));
}

std::size_t count_guard_hits(const GridSpec& grid, double guard) {
  const auto p = sample_symbol(grid, wave_p);
  return static_cast<std::size_t>(std::count_if(
      p.begin(), p.end(), [guard](double v) { return std::abs(v) <= guard; }));
}

// Evaluates one split component both ways, cross-checks, and inverts the
// closed form.
class SplitEvaluator {
 public:
  SplitEvaluator(const RealVolume& psi, const ReconConfig& cfg,
                 double residue_tol)
      : cfg_(cfg),
        spectrum_(forward_fft(psi)),
        residue_tol_(residue_tol) {
    diag_.guard_hits = count_guard_hits(psi.grid(), cfg.q_guard);
  }

  template <typename ClosedForm>
  RealVolume part(const char* label, ClosedForm closed,
                  const std::vector<std::string>& chain,
                  const SymbolContext& ctx) {
    const ReconConfig& cfg = cfg_;
    const auto closed_spec = apply_multiplier(
        spectrum_, [&](const Vec3& xi) { return closed(xi, cfg); });
    const auto chain_spec = apply_chain(spectrum_, chain, ctx);
    const double gap = off_guard_discrepancy(chain_spec, closed_spec, cfg.q_guard);
    diag_.max_discrepancy = std::max(diag_.max_discrepancy, gap);
    if (gap > cfg.consistency_tol) {
      throw ConsistencyError(std::string(label) +
                             ": closed form and operator chain differ by " +
                             std::to_string(gap) + " (relative)");
    }
    auto inv = inverse_fft_measured(closed_spec, residue_tol_);
    diag_.max_residue = std::max(diag_.max_residue, inv.residue);
    return std::move(inv.volume);
  }

  const ReconDiagnostics& diagnostics() const { return diag_; }

 private:
  const ReconConfig& cfg_;
  SpectralVolume spectrum_;
  double residue_tol_;
  ReconDiagnostics diag_;
};

SymbolContext tkd_context(const ReconConfig& cfg) {
  SymbolContext ctx = cfg.symbol_context();
  ctx.params.s = 2.0;
  ctx.params.K = 1.0;
  return ctx;
}

ReconResult split_reconstruction(const RealVolume& psi, const ReconConfig& cfg,
                                 bool enhanced, double residue_tol) {
  SplitEvaluator eval(psi, cfg, residue_tol);
  const SymbolContext ctx = cfg.symbol_context();
  RealVolume chi1 = eval.part("chi1", closed_form::chi1, chains::chi1(),
                              tkd_context(cfg));
  RealVolume chi21 =
      enhanced ? eval.part("chi21", closed_form::enhanced_chi21,
                           chains::enhanced_chi21(cfg.params.m), ctx)
               : eval.part("chi21", closed_form::reg_chi21, chains::reg_chi21(),
                           ctx);
  RealVolume chi22 =
      eval.part("chi22", closed_form::reg_chi22, chains::reg_chi22(), ctx);
  RealVolume chi2 = chi21 + chi22;
  RealVolume chi = chi1 + chi2;
  return {std::move(chi),          std::move(chi1),  std::move(chi2),
          std::move(chi21),        std::move(chi22), eval.diagnostics()};
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "naive") return Method::Naive;
  if (name == "tkd-classic") return Method::TkdClassic;
  if (name == "tkd-smooth") return Method::TkdSmooth;
  if (name == "r-reg") return Method::RReg;
  if (name == "t-enhanced") return Method::TEnhanced;
  throw ConfigError("unknown reconstruction method '" + std::string(name) + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::Naive: return "naive";
    case Method::TkdClassic: return "tkd-classic";
    case Method::TkdSmooth: return "tkd-smooth";
    case Method::RReg: return "r-reg";
    case Method::TEnhanced: return "t-enhanced";
  }
  return "unknown";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::Naive, Method::TkdClassic,
                                              Method::TkdSmooth, Method::RReg,
                                              Method::TEnhanced};
  return methods;
}

ReconConfig ReconConfig::defaults(const GridSpec& grid, Method method) {
  ReconConfig cfg;
  cfg.method = method;
  cfg.params.eps_c = default_lowpass_eps(grid, cfg.cutoff);
  cfg.halfline.ramp = default_halfline_ramp(grid);
  if (method == Method::RReg) cfg.params.s = 2.0;
  cfg.params.K = default_regularizer_K(cfg.params.s, cfg.params.eps_c, cfg.cutoff);
  return cfg;
}

void ReconConfig::validate() const {
  params.validate();
  cutoff.validate();
  halfline.validate();
  if (!(params.bigM > cutoff.inner)) {
    throw ArgumentError("M must exceed the cutoff plateau edge");
  }
  if (!(naive_floor > 0.0)) throw ArgumentError("naive floor must be positive");
  if (!(consistency_tol > 0.0)) {
    throw ArgumentError("consistency tolerance must be positive");
  }
  if (q_guard < 0.0) throw ArgumentError("q_inverse guard must be >= 0");
}

SymbolContext ReconConfig::symbol_context() const {
  return {params, cutoff, halfline, q_guard};
}

namespace closed_form {

double chi1(const Vec3& xi, const ReconConfig& cfg) {
  const double b = cutoff_b(xi, cfg.params.hbar, cfg.cutoff);
  const double d = dipole_D(xi);
  if (b >= 1.0 || d == 0.0) return 0.0;
  return (1.0 - b) / d;
}

double tkd_chi2(const Vec3& xi, const ReconConfig& cfg) {
  return cutoff_b(xi, cfg.params.hbar, cfg.cutoff) * sign_of(wave_p(xi)) /
         cfg.params.hbar;
}

double reg_chi21(const Vec3& xi, const ReconConfig& cfg) {
  const SymbolParams& sp = cfg.params;
  const double r2 = laplacian_mult(xi);
  if (r2 == 0.0) return 0.0;
  const double c = lowpass_C(xi, sp.bigM, sp.eps_c, cfg.cutoff);
  return sign_of(wave_p(xi)) / sp.hbar * sp.K *
         std::pow(std::sqrt(r2), 2.0 - sp.s) * (1.0 - c) *
         cutoff_b(xi, sp.hbar, cfg.cutoff);
}

double reg_chi22(const Vec3& xi, const ReconConfig& cfg) {
  const SymbolParams& sp = cfg.params;
  return sign_of(wave_p(xi)) / sp.hbar *
         lowpass_C(xi, sp.bigM, sp.eps_c, cfg.cutoff) *
         cutoff_b(xi, sp.hbar, cfg.cutoff) * laplacian_mult(xi);
}

double enhanced_chi21(const Vec3& xi, const ReconConfig& cfg) {
  return std::pow(halfwave_T(xi, cfg.halfline), cfg.params.m) *
         reg_chi21(xi, cfg);
}

}  // namespace closed_form

namespace chains {

std::vector<std::string> chi1() { return {"laplacian", "1-b", "qinv"}; }

std::vector<std::string> tkd_chi2() {
  return {"laplacian", "b", "R", "qinv", "P"};
}

std::vector<std::string> reg_chi21() {
  return {"laplacian", "b", "1-C", "R", "qinv", "P"};
}

std::vector<std::string> reg_chi22() {
  return {"laplacian", "b", "C", "qinv", "P"};
}

std::vector<std::string> enhanced_chi21(int m) {
  auto names = reg_chi21();
  names.insert(names.end(), static_cast<std::size_t>(m), "T");
  return names;
}

}  // namespace chains

RealVolume naive_inverse(const RealVolume& psi, double floor) {
  if (!(floor > 0.0)) throw ArgumentError("naive floor must be positive");
  return thresholded_division(psi, floor);
}

RealVolume tkd_classic(const RealVolume& psi, double hbar) {
  if (!(hbar > 0.0)) throw ArgumentError("hbar must be positive");
  return thresholded_division(psi, hbar);
}

ReconResult smooth_tkd(const RealVolume& psi, const ReconConfig& cfg) {
  cfg.validate();
  SplitEvaluator eval(psi, cfg, kDefaultResidueTolerance);
  const SymbolContext ctx = tkd_context(cfg);
  RealVolume chi1 = eval.part("chi1", closed_form::chi1, chains::chi1(), ctx);
  RealVolume chi2 =
      eval.part("chi2", closed_form::tkd_chi2, chains::tkd_chi2(), ctx);
  RealVolume chi = chi1 + chi2;
  return {std::move(chi), std::move(chi1), std::move(chi2), std::nullopt,
          std::nullopt, eval.diagnostics()};
}

ReconResult r_regularized(const RealVolume& psi, const ReconConfig& cfg) {
  cfg.validate();
  if (cfg.params.s < 2.0) {
    throw ArgumentError("r-reg needs s >= 2, got " + std::to_string(cfg.params.s));
  }
  return split_reconstruction(psi, cfg, false, kDefaultResidueTolerance);
}

ReconResult t_enhanced(const RealVolume& psi, const ReconConfig& cfg) {
  cfg.validate();
  if (cfg.params.m % 2 != 0) {
    throw ArgumentError("t-enhanced needs an even power m: T is odd in xi, so "
                        "odd powers give a non-real field (m = " +
                        std::to_string(cfg.params.m) + ")");
  }
  return split_reconstruction(psi, cfg, true, 1e-10);
}

ReconResult reconstruct(const RealVolume& psi, const ReconConfig& cfg) {
  switch (cfg.method) {
    case Method::Naive:
      return {naive_inverse(psi, cfg.naive_floor), std::nullopt, std::nullopt,
              std::nullopt, std::nullopt, {}};
    case Method::TkdClassic:
      return {tkd_classic(psi, cfg.params.hbar), std::nullopt, std::nullopt,
              std::nullopt, std::nullopt, {}};
    case Method::TkdSmooth: return smooth_tkd(psi, cfg);
    case Method::RReg: return r_regularized(psi, cfg);
    case Method::TEnhanced: return t_enhanced(psi, cfg);
  }
  throw ArgumentError("unhandled reconstruction method");
}

std::vector<double> compose_multiplier(const GridSpec& grid,
                                       const std::vector<std::string>& names,
                                       const SymbolContext& ctx) {
  std::vector<Symbol> symbols;
  for (const auto& n : names) symbols.push_back(make_symbol(n, ctx));
  return sample_symbol(grid, [&](const Vec3& xi) {
    double v = 1.0;
    for (const auto& s : symbols) v *= s(xi);
    return v;
  });
}

RealVolume compose_pipeline(const RealVolume& psi,
                            const std::vector<std::string>& names,
                            const SymbolContext& ctx) {
  const auto multiplier = compose_multiplier(psi.grid(), names, ctx);
  return inverse_fft(apply_multiplier(forward_fft(psi), multiplier));
}

SpectralVolume apply_chain(const SpectralVolume& spectrum,
                           const std::vector<std::string>& names,
                           const SymbolContext& ctx) {
  SpectralVolume out = spectrum;
  for (const auto& n : names) out = apply_multiplier(out, make_symbol(n, ctx));
  return out;
}

double off_guard_discrepancy(const SpectralVolume& a, const SpectralVolume& b,
                             double guard) {
  require_same_grid(a.grid(), b.grid(), "discrepancy");
  const auto p = sample_symbol(a.grid(), wave_p);
  double diff2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i]) <= guard) continue;
    diff2 += std::norm(a[i] - b[i]);
    ref2 += std::norm(b[i]);
  }
  return ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
}

}  // namespace qsm
