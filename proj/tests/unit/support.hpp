#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "qsm/volume.hpp"

namespace qsm::testing {

// Hand-rolled generators; every property test names its seed so failures
// replay exactly.
inline RealVolume random_volume(const GridSpec& grid, std::uint64_t seed,
                                double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> data(grid.size());
  for (auto& v : data) v = u(rng);
  return RealVolume(grid, std::move(data));
}

inline Vec3 random_xi(std::mt19937_64& rng, double scale = 4.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Index3 random_index(std::mt19937_64& rng, const GridSpec& g) {
  return {std::uniform_int_distribution<int>(0, g.n(0) - 1)(rng),
          std::uniform_int_distribution<int>(0, g.n(1) - 1)(rng),
          std::uniform_int_distribution<int>(0, g.n(2) - 1)(rng)};
}

inline RealVolume impulse(const GridSpec& grid, const Index3& at, double amp = 1.0) {
  std::vector<double> data(grid.size(), 0.0);
  data[grid.flat(at)] = amp;
  return RealVolume(grid, std::move(data));
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace qsm::testing
