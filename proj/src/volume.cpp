#include "qsm/volume.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "qsm/error.hpp"

namespace qsm {

namespace {

void check_length(const GridSpec& grid, std::size_t n) {
  if (n != grid.size()) {
    throw ArgumentError("volume data length " + std::to_string(n) +
                        " does not match grid " + grid.describe());
  }
}

}  // namespace

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) {
    throw ArgumentError(std::string(what) + ": grid mismatch (" + a.describe() +
                        " vs " + b.describe() + ")");
  }
}

RealVolume::RealVolume(GridSpec grid, std::vector<double> data)
    : grid_(grid), data_(std::move(data)) {
  check_length(grid_, data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericError("non-finite volume value at voxel " +
                         std::to_string(i));
    }
  }
}

RealVolume RealVolume::zeros(const GridSpec& grid) {
  return constant(grid, 0.0);
}

RealVolume RealVolume::constant(const GridSpec& grid, double value) {
  return RealVolume(grid, std::vector<double>(grid.size(), value));
}

double RealVolume::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double RealVolume::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double RealVolume::mean() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s / static_cast<double>(data_.size());
}

SpectralVolume::SpectralVolume(GridSpec grid, std::vector<Complex> data)
    : grid_(grid), data_(std::move(data)) {
  check_length(grid_, data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i].real()) || !std::isfinite(data_[i].imag())) {
      throw NumericError("non-finite spectral value at index " +
                         std::to_string(i));
    }
  }
}

double SpectralVolume::norm() const {
  double s = 0.0;
  for (const Complex& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

namespace {

template <typename Vol, typename Op>
Vol combine(const Vol& a, const Vol& b, Op op, const char* what) {
  require_same_grid(a.grid(), b.grid(), what);
  using T = typename std::decay_t<decltype(a.values())>::value_type;
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return Vol(a.grid(), std::move(out));
}

}  // namespace

RealVolume operator+(const RealVolume& a, const RealVolume& b) {
  return combine(a, b, std::plus<>{}, "volume sum");
}

RealVolume operator-(const RealVolume& a, const RealVolume& b) {
  return combine(a, b, std::minus<>{}, "volume difference");
}

RealVolume operator*(double s, const RealVolume& v) {
  std::vector<double> out(v.values());
  for (double& x : out) x *= s;
  return RealVolume(v.grid(), std::move(out));
}

SpectralVolume operator+(const SpectralVolume& a, const SpectralVolume& b) {
  return combine(a, b, std::plus<>{}, "spectrum sum");
}

SpectralVolume operator-(const SpectralVolume& a, const SpectralVolume& b) {
  return combine(a, b, std::minus<>{}, "spectrum difference");
}

double relative_l2(const RealVolume& a, const RealVolume& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

double relative_l2(const SpectralVolume& a, const SpectralVolume& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

}  // namespace qsm
