#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsm/recon.hpp"
#include "qsm/volume.hpp"

namespace qsm {

/// Voxels where |truth| > 0, grown by a Euclidean ball of `dilation` voxels
/// (periodic).
class SupportMask {
 public:
  static SupportMask from_truth(const RealVolume& truth, int dilation);
  static SupportMask from_flags(const GridSpec& grid,
                                std::vector<std::uint8_t> inside,
                                int dilation = 0);

  const GridSpec& grid() const { return grid_; }
  int dilation() const { return dilation_; }
  bool inside(std::size_t idx) const { return inside_[idx] != 0; }
  std::size_t count() const;

 private:
  SupportMask(GridSpec grid, std::vector<std::uint8_t> inside, int dilation)
      : grid_(grid), inside_(std::move(inside)), dilation_(dilation) {}

  GridSpec grid_;
  std::vector<std::uint8_t> inside_;
  int dilation_;
};

/// RMS of recon - truth over the mask after matching the means inside it
/// (the mean of chi is not recoverable).
double rmse_inside(const RealVolume& recon, const RealVolume& truth,
                   const SupportMask& mask);

/// L2 norm of recon over voxels outside the mask.
double streak_energy(const RealVolume& recon, const SupportMask& mask);

/// Periodic distance, in voxels, from v to the cone 2(dx1^2 + dx2^2) = dx3^2
/// with apex a.
double cone_distance(const GridSpec& grid, const Index3& apex, const Index3& v);

/// Fraction of ||vol||^2 within `halfwidth` voxels of the cone through apex.
double cone_fraction(const RealVolume& vol, const Index3& apex, double halfwidth);

/// Fraction of voxels inside that shell: the value a featureless volume gives.
double cone_shell_fraction(const GridSpec& grid, const Index3& apex,
                           double halfwidth);

/// The spatial fundamental solution of the wave-type operator, mollified:
/// 3 / (4 pi sqrt(x3^2 - 2 rho^2 + eps^2)) inside 2 rho^2 < x3^2, else 0.
double g_kernel(const Vec3& x, double mollify_eps);

struct GKernelOptions {
  /// Mollifier inside the square root, in voxels of the coarse grid.
  double mollify_eps = 0.02;
  /// Frequencies with |p| >= band * max|p| are compared.
  double band = 0.3;
  /// g is sampled on a grid `refine` times finer than the target grid...
  int refine = 4;
  /// ...with each fine cell averaged over subsample^3 midpoints.
  int subsample = 4;
  /// Smooth radial roll-off from half the box radius to the box edge, so the
  /// truncated kernel has no jump at the periodic boundary.
  bool taper = true;
};

struct GKernelReport {
  SpectralVolume spectrum;
  double median_relative_deviation;
  double mean_relative_deviation;
  std::size_t frequencies_tested;
};

/// Rasterizes g centred on the origin (periodic), transforms it, divides out
/// the cell-average transfer function and compares the result on the target
/// grid's frequencies with 1/p. refine = subsample = 1 and taper off gives the
/// plain point-sampled transform.
GKernelReport g_kernel_oracle(const GridSpec& grid, const GKernelOptions& opts = {});

struct MetricsReport {
  std::string method;
  double rmse_inside = 0.0;
  double streak_energy = 0.0;
  double cone_fraction = 0.0;
  double shell_fraction = 0.0;
  bool mean_unrecoverable = true;
  SymbolParams params;
  double naive_floor = 0.0;
};

struct MetricOptions {
  int dilation = 3;
  double cone_halfwidth = 2.0;
  std::optional<Index3> apex;
};

/// rmse over the bare support, streak energy outside the dilated support,
/// and cone_fraction of `cone_source` (usually chi2) at the apex.
MetricsReport measure(const std::string& method, const RealVolume& recon,
                      const RealVolume& truth, const RealVolume& cone_source,
                      const MetricOptions& opts);

struct CheckResult {
  std::string name;
  double residual;
  double tolerance;
  bool passed;
};

struct SuiteReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::vector<std::string> offenders() const;
};

struct SuiteConfig {
  GridSpec grid = GridSpec::cube(32);
  /// Empty: every check from consistency_check_names().
  std::optional<std::vector<std::string>> checks;
  /// Replaces every per-check tolerance when set.
  std::optional<double> tolerance;
  std::optional<ReconConfig> recon;
};

const std::vector<std::string>& consistency_check_names();

/// Closed-form vs operator-chain agreement and the clean-data identities, on
/// the default phantom. Throws ConfigError for unknown check names.
SuiteReport consistency_suite(const SuiteConfig& cfg);

}  // namespace qsm
