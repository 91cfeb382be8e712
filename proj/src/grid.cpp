#include "qsm/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qsm/error.hpp"

namespace qsm {

GridSpec::GridSpec(int n1, int n2, int n3, double d1, double d2, double d3)
    : n_{n1, n2, n3}, delta_{d1, d2, d3} {
  for (int a = 0; a < 3; ++a) {
    if (n_[a] < 4 || n_[a] % 2 != 0) {
      throw ArgumentError("grid size along axis " + std::to_string(a) +
                          " must be even and >= 4, got " +
                          std::to_string(n_[a]));
    }
    if (!(delta_[a] > 0.0) || !std::isfinite(delta_[a])) {
      throw ArgumentError("grid spacing along axis " + std::to_string(a) +
                          " must be positive");
    }
  }
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << n_[0] << "x" << n_[1] << "x" << n_[2] << " @ (" << delta_[0] << ", "
     << delta_[1] << ", " << delta_[2] << ")";
  return os.str();
}

FrequencyGrid::FrequencyGrid(const GridSpec& grid) : grid_(grid) {
  for (int a = 0; a < 3; ++a) {
    const int n = grid.n(a);
    const double scale = 2.0 * std::numbers::pi / (n * grid.spacing(a));
    axes_[a].resize(n);
    for (int k = 0; k < n; ++k) axes_[a][k] = scale * wrap_index(k, n);
  }
}

Vec3 FrequencyGrid::at(const Index3& k) const {
  return {axes_[0][k.i], axes_[1][k.j], axes_[2][k.k]};
}

double FrequencyGrid::max_norm() const {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double nyq = axes_[a][grid_.n(a) / 2];
    s += nyq * nyq;
  }
  return std::sqrt(s);
}

double FrequencyGrid::min_step() const {
  double step = axes_[0][1];
  for (int a = 1; a < 3; ++a) step = std::min(step, axes_[a][1]);
  return step;
}

Vec3 frequency_at(const GridSpec& grid, const Index3& k) {
  if (!grid.contains(k)) {
    throw ArgumentError("frequency index (" + std::to_string(k.i) + ", " +
                        std::to_string(k.j) + ", " + std::to_string(k.k) +
                        ") outside grid " + grid.describe());
  }
  Vec3 xi;
  const int idx[3] = {k.i, k.j, k.k};
  for (int a = 0; a < 3; ++a) {
    const double scale =
        2.0 * std::numbers::pi / (grid.n(a) * grid.spacing(a));
    xi[a] = scale * wrap_index(idx[a], grid.n(a));
  }
  return xi;
}

}  // namespace qsm
