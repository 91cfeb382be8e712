#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qsm/config.hpp"

namespace qsm {

struct ExperimentOutputs {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
  std::vector<MetricsReport> metrics;
};

/// phantom -> forward -> perturb -> reconstruct -> slices -> metrics.
/// A failing stage rethrows with the stage name prefixed, keeping the error
/// category.
ExperimentOutputs run_experiment(const ExperimentConfig& cfg);
ExperimentOutputs run_experiment(
    const std::filesystem::path& config_path,
    const std::optional<std::filesystem::path>& output_override = std::nullopt);

/// Runs `fn`, rethrowing any library error with "<stage>: " in front.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn());

}  // namespace qsm

#include "qsm/error.hpp"

namespace qsm {

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  const std::string p = stage + ": ";
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(p + e.detail(), e.offset());
  } catch (const IoError& e) {
    throw IoError(p + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(p + e.what());
  } catch (const ArgumentError& e) {
    throw ArgumentError(p + e.what());
  } catch (const SymmetryError& e) {
    throw SymmetryError(p + e.what(), e.residue());
  } catch (const SymbolDomainError& e) {
    throw SymbolDomainError(p + e.what(), e.flat_index());
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(p + e.what());
  } catch (const NumericError& e) {
    throw NumericError(p + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(p + e.what());
  }
}

}  // namespace qsm
