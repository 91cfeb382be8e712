#pragma once

#include <cstdint>
#include <vector>

#include "qsm/volume.hpp"

namespace qsm {

/// Solid ellipsoid in grid-normalized coordinates ([-1, 1) per axis).
struct Ellipsoid {
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 semi_axes{1.0, 1.0, 1.0};
  /// z-x-z Euler angles (phi, theta, psi), radians.
  Vec3 euler{0.0, 0.0, 0.0};
  double amplitude = 1.0;

  void validate() const;
  bool contains(const Vec3& x) const;
};

struct PhantomSpec {
  std::vector<Ellipsoid> ellipsoids;

  void validate() const;
};

/// The 10-ellipsoid 3-D Shepp-Logan head with the high-contrast (modified)
/// amplitudes, so values lie in [0, 1].
PhantomSpec shepp_logan_3d();

/// Grid-normalized coordinate of a voxel center: (i - n/2) * 2/n.
Vec3 normalized_position(const GridSpec& grid, const Index3& v);

/// Sum of amplitudes of ellipsoids containing each voxel center. With
/// supersample > 1 each voxel averages supersample^3 sub-samples.
RealVolume rasterize_phantom(const PhantomSpec& spec, const GridSpec& grid,
                             int supersample = 1);

/// psi = IFFT(D * FFT(chi)).
RealVolume forward_model(const RealVolume& chi);

struct Spike {
  Index3 at;
  double amplitude = 0.0;
};

struct PerturbationSpec {
  std::vector<Spike> spikes;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Adds the spikes and, if noise_sigma > 0, seeded white Gaussian noise.
RealVolume perturb(const RealVolume& psi, const PerturbationSpec& pert);

/// Default spike height: five times the peak |psi| of the clean field.
double default_spike_amplitude(const RealVolume& clean_psi);

}  // namespace qsm
