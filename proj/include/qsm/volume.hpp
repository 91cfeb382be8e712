#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qsm/grid.hpp"

namespace qsm {

using Complex = std::complex<double>;

/// Real scalar field on a grid, x-fastest layout. Immutable once built.
class RealVolume {
 public:
  /// Throws ArgumentError on a length mismatch, NumericError on non-finite data.
  RealVolume(GridSpec grid, std::vector<double> data);
  static RealVolume zeros(const GridSpec& grid);
  static RealVolume constant(const GridSpec& grid, double value);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }
  double operator[](std::size_t idx) const { return data_[idx]; }
  double at(const Index3& v) const { return data_[grid_.flat(v)]; }
  std::size_t size() const { return data_.size(); }

  double norm() const;
  double max_abs() const;
  double mean() const;

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

/// Complex field indexed by DFT frequency, same layout as RealVolume.
class SpectralVolume {
 public:
  SpectralVolume(GridSpec grid, std::vector<Complex> data);

  const GridSpec& grid() const { return grid_; }
  std::span<const Complex> data() const { return data_; }
  const std::vector<Complex>& values() const { return data_; }
  Complex operator[](std::size_t idx) const { return data_[idx]; }
  Complex at(const Index3& v) const { return data_[grid_.flat(v)]; }
  std::size_t size() const { return data_.size(); }

  double norm() const;

 private:
  GridSpec grid_;
  std::vector<Complex> data_;
};

RealVolume operator+(const RealVolume& a, const RealVolume& b);
RealVolume operator-(const RealVolume& a, const RealVolume& b);
RealVolume operator*(double s, const RealVolume& v);
SpectralVolume operator+(const SpectralVolume& a, const SpectralVolume& b);
SpectralVolume operator-(const SpectralVolume& a, const SpectralVolume& b);

/// ||a - b|| / ||b||, or ||a|| when b is zero.
double relative_l2(const RealVolume& a, const RealVolume& b);
double relative_l2(const SpectralVolume& a, const SpectralVolume& b);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace qsm
