#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace qsm {

using Vec3 = std::array<double, 3>;

struct Index3 {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const Index3&, const Index3&) = default;
};

/// Cubic sampling lattice. Axis 0 is the fastest-varying in memory; axis 2
/// is the main-field direction (x3).
class GridSpec {
 public:
  GridSpec(int n1, int n2, int n3, double d1 = 1.0, double d2 = 1.0,
           double d3 = 1.0);
  static GridSpec cube(int n, double spacing = 1.0) {
    return GridSpec(n, n, n, spacing, spacing, spacing);
  }

  int n(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return delta_[axis]; }
  const std::array<int, 3>& dims() const { return n_; }
  const Vec3& spacings() const { return delta_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }

  bool contains(const Index3& v) const {
    return v.i >= 0 && v.i < n_[0] && v.j >= 0 && v.j < n_[1] && v.k >= 0 &&
           v.k < n_[2];
  }
  std::size_t flat(const Index3& v) const {
    return static_cast<std::size_t>(v.i) +
           static_cast<std::size_t>(n_[0]) *
               (static_cast<std::size_t>(v.j) +
                static_cast<std::size_t>(n_[1]) * static_cast<std::size_t>(v.k));
  }
  Index3 unflat(std::size_t idx) const {
    Index3 v;
    v.i = static_cast<int>(idx % n_[0]);
    idx /= n_[0];
    v.j = static_cast<int>(idx % n_[1]);
    v.k = static_cast<int>(idx / n_[1]);
    return v;
  }

  std::string describe() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::array<int, 3> n_;
  Vec3 delta_;
};

/// Maps a DFT index to the signed range [-n/2, n/2); Nyquist goes negative.
inline int wrap_index(int k, int n) { return k < n / 2 ? k : k - n; }

/// Angular frequencies of the DFT lattice, xi_a = 2*pi*wrap(k_a)/(n_a*delta_a).
class FrequencyGrid {
 public:
  explicit FrequencyGrid(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  Vec3 at(const Index3& k) const;
  Vec3 at_flat(std::size_t idx) const { return at(grid_.unflat(idx)); }
  double axis_value(int axis, int k) const { return axes_[axis][k]; }
  /// Largest |xi| over the lattice.
  double max_norm() const;
  /// Smallest nonzero per-axis frequency step.
  double min_step() const;

 private:
  GridSpec grid_;
  std::array<std::vector<double>, 3> axes_;
};

/// Checked version of FrequencyGrid::at; throws ArgumentError when out of range.
Vec3 frequency_at(const GridSpec& grid, const Index3& k);

/// Index of the partner frequency -xi (Hermitian pairing, Nyquist fixed).
inline Index3 mirror_index(const GridSpec& g, const Index3& k) {
  return {(g.n(0) - k.i) % g.n(0), (g.n(1) - k.j) % g.n(1),
          (g.n(2) - k.k) % g.n(2)};
}

}  // namespace qsm
