#pragma once

#include <functional>
#include <vector>

#include "qsm/volume.hpp"

namespace qsm {

/// A scalar, x-independent Fourier multiplier.
using Symbol = std::function<double(const Vec3&)>;

inline constexpr double kDefaultResidueTolerance = 1e-8;

/// Unnormalized forward DFT (FFTW sign convention, e^{-i x xi}).
SpectralVolume forward_fft(const RealVolume& v);

struct InverseTransform {
  RealVolume volume;
  /// ||Im|| / ||z|| of the normalized inverse transform; 0 for a zero field.
  double residue;
};

/// Normalized inverse DFT that keeps the imaginary residue. Throws
/// SymmetryError when the residue exceeds `tolerance`.
InverseTransform inverse_fft_measured(const SpectralVolume& s,
                                      double tolerance = kDefaultResidueTolerance);

inline RealVolume inverse_fft(const SpectralVolume& s,
                              double tolerance = kDefaultResidueTolerance) {
  return inverse_fft_measured(s, tolerance).volume;
}

/// Evaluates `m` at every lattice frequency. Throws SymbolDomainError on the
/// first non-finite value.
std::vector<double> sample_symbol(const GridSpec& grid, const Symbol& m);

/// Pointwise product data(k) * m(xi(k)).
SpectralVolume apply_multiplier(const SpectralVolume& s, const Symbol& m);
/// Same, with the multiplier already sampled on the lattice.
SpectralVolume apply_multiplier(const SpectralVolume& s,
                                std::span<const double> multiplier);

/// Threads used by the FFT backend, from QSM_NUM_THREADS (default 1).
int fft_thread_count();

}  // namespace qsm
