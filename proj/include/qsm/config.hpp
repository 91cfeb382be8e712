#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qsm/analysis.hpp"
#include "qsm/io.hpp"
#include "qsm/phantom.hpp"
#include "qsm/recon.hpp"

namespace qsm {

/// Spike whose amplitude may be left to default_spike_amplitude.
struct SpikeSetting {
  Index3 at;
  std::optional<double> amplitude;
};

struct ExperimentConfig {
  GridSpec grid = GridSpec::cube(64);
  PhantomSpec phantom = shepp_logan_3d();
  /// Set when the phantom came from a file.
  std::optional<std::filesystem::path> phantom_file;
  int supersample = 1;

  std::vector<SpikeSetting> spikes;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  /// One entry per requested reconstruction, fully resolved.
  std::vector<ReconConfig> recons;

  MetricOptions metrics;
  /// Apex defaults to the first spike.
  bool apex_from_first_spike = true;

  std::filesystem::path output_dir = "qsm_out";
  Window chi_window = kChiWindow;
  Window psi_window = kPsiWindow;
};

/// Parses the sectioned key/value experiment file. Errors are ConfigError and
/// name the line. Relative phantom paths resolve against the config's folder.
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config_text(
    const std::string& text, const std::filesystem::path& base_dir = ".");

/// Phantom file: one [ellipsoid...] section per ellipsoid, in order, with
/// center, semi_axes, euler_deg and amplitude.
PhantomSpec load_phantom_file(const std::filesystem::path& path);
std::string phantom_file_text(const PhantomSpec& spec);

/// Built-in experiment mirroring configs/default.ini for a cubic grid.
ExperimentConfig default_experiment(int n);

}  // namespace qsm
