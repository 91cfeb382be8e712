#include "qsm/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "qsm/error.hpp"
#include "qsm/fft.hpp"
#include "qsm/symbols.hpp"

namespace qsm {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 euler_matrix(const Vec3& e) {
  const double cphi = std::cos(e[0]), sphi = std::sin(e[0]);
  const double cth = std::cos(e[1]), sth = std::sin(e[1]);
  const double cpsi = std::cos(e[2]), spsi = std::sin(e[2]);
  return {{{cpsi * cphi - cth * sphi * spsi, cpsi * sphi + cth * cphi * spsi,
            spsi * sth},
           {-spsi * cphi - cth * sphi * cpsi, -spsi * sphi + cth * cphi * cpsi,
            cpsi * sth},
           {sth * sphi, -sth * cphi, cth}}};
}

}  // namespace

void Ellipsoid::validate() const {
  for (double a : semi_axes) {
    if (!(a > 0.0)) throw ArgumentError("ellipsoid semi-axes must be positive");
  }
  const double reach = std::max({semi_axes[0], semi_axes[1], semi_axes[2]});
  for (double c : center) {
    if (c - reach > 1.0 || c + reach < -1.0) {
      throw ArgumentError("ellipsoid lies entirely outside [-1, 1]^3");
    }
  }
  if (!std::isfinite(amplitude)) {
    throw ArgumentError("ellipsoid amplitude must be finite");
  }
}

bool Ellipsoid::contains(const Vec3& x) const {
  const Mat3 rot = euler_matrix(euler);
  const Vec3 d{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
  double q = 0.0;
  for (int r = 0; r < 3; ++r) {
    const double u = rot[r][0] * d[0] + rot[r][1] * d[1] + rot[r][2] * d[2];
    q += (u * u) / (semi_axes[r] * semi_axes[r]);
  }
  return q <= 1.0;
}

void PhantomSpec::validate() const {
  if (ellipsoids.empty()) throw ArgumentError("phantom has no ellipsoids");
  for (const auto& e : ellipsoids) e.validate();
}

PhantomSpec shepp_logan_3d() {
  constexpr double deg = std::numbers::pi / 180.0;
  // amplitude, semi-axes (x, y, z), center (x, y, z), euler (phi, theta, psi)
  struct Row {
    double A, a, b, c, x0, y0, z0, phi, theta, psi;
  };
  constexpr Row rows[] = {
      {1.0, 0.6900, 0.920, 0.810, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.874, 0.780, 0.0, -0.0184, 0.0, 0.0, 0.0, 0.0},
      {-0.2, 0.1100, 0.310, 0.220, 0.22, 0.0, 0.0, -18.0, 0.0, 10.0},
      {-0.2, 0.1600, 0.410, 0.280, -0.22, 0.0, 0.0, 18.0, 0.0, 10.0},
      {0.1, 0.2100, 0.250, 0.410, 0.0, 0.35, -0.15, 0.0, 0.0, 0.0},
      {0.1, 0.0460, 0.046, 0.050, 0.0, 0.1, 0.25, 0.0, 0.0, 0.0},
      {0.1, 0.0460, 0.046, 0.050, 0.0, -0.1, 0.25, 0.0, 0.0, 0.0},
      {0.1, 0.0460, 0.023, 0.050, -0.08, -0.605, 0.0, 0.0, 0.0, 0.0},
      {0.1, 0.0230, 0.023, 0.020, 0.0, -0.606, 0.0, 0.0, 0.0, 0.0},
      {0.1, 0.0230, 0.046, 0.020, 0.06, -0.605, 0.0, 0.0, 0.0, 0.0},
  };
  PhantomSpec spec;
  for (const Row& r : rows) {
    spec.ellipsoids.push_back({{r.x0, r.y0, r.z0},
                               {r.a, r.b, r.c},
                               {r.phi * deg, r.theta * deg, r.psi * deg},
                               r.A});
  }
  return spec;
}

Vec3 normalized_position(const GridSpec& grid, const Index3& v) {
  const int idx[3] = {v.i, v.j, v.k};
  Vec3 x;
  for (int a = 0; a < 3; ++a) {
    x[a] = (idx[a] - grid.n(a) / 2) * (2.0 / grid.n(a));
  }
  return x;
}

RealVolume rasterize_phantom(const PhantomSpec& spec, const GridSpec& grid,
                             int supersample) {
  spec.validate();
  if (supersample < 1) throw ArgumentError("supersample must be >= 1");

  struct Prepared {
    Mat3 rot;
    Vec3 center;
    Vec3 inv_axes2;
    double amplitude;
  };
  std::vector<Prepared> prepared;
  for (const auto& e : spec.ellipsoids) {
    prepared.push_back({euler_matrix(e.euler),
                        e.center,
                        {1.0 / (e.semi_axes[0] * e.semi_axes[0]),
                         1.0 / (e.semi_axes[1] * e.semi_axes[1]),
                         1.0 / (e.semi_axes[2] * e.semi_axes[2])},
                        e.amplitude});
  }
  auto value_at = [&](const Vec3& x) {
    double v = 0.0;
    for (const auto& e : prepared) {
      const Vec3 d{x[0] - e.center[0], x[1] - e.center[1], x[2] - e.center[2]};
      double q = 0.0;
      for (int r = 0; r < 3; ++r) {
        const double u =
            e.rot[r][0] * d[0] + e.rot[r][1] * d[1] + e.rot[r][2] * d[2];
        q += u * u * e.inv_axes2[r];
      }
      if (q <= 1.0) v += e.amplitude;
    }
    return v;
  };

  std::vector<double> data(grid.size());
  const Vec3 cell{2.0 / grid.n(0), 2.0 / grid.n(1), 2.0 / grid.n(2)};
  const double weight = 1.0 / (supersample * supersample * supersample);
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    const Vec3 x = normalized_position(grid, grid.unflat(idx));
    if (supersample == 1) {
      data[idx] = value_at(x);
      continue;
    }
    double acc = 0.0;
    for (int c = 0; c < supersample; ++c) {
      for (int b = 0; b < supersample; ++b) {
        for (int a = 0; a < supersample; ++a) {
          const Vec3 sub{x[0] + cell[0] * ((a + 0.5) / supersample - 0.5),
                         x[1] + cell[1] * ((b + 0.5) / supersample - 0.5),
                         x[2] + cell[2] * ((c + 0.5) / supersample - 0.5)};
          acc += value_at(sub);
        }
      }
    }
    data[idx] = acc * weight;
  }
  return RealVolume(grid, std::move(data));
}

RealVolume forward_model(const RealVolume& chi) {
  return inverse_fft(apply_multiplier(forward_fft(chi), dipole_D));
}

RealVolume perturb(const RealVolume& psi, const PerturbationSpec& pert) {
  const GridSpec& grid = psi.grid();
  if (pert.noise_sigma < 0.0) throw ArgumentError("noise sigma must be >= 0");
  std::vector<double> data(psi.values());
  for (const Spike& s : pert.spikes) {
    if (!grid.contains(s.at)) {
      throw ArgumentError("spike at (" + std::to_string(s.at.i) + ", " +
                          std::to_string(s.at.j) + ", " +
                          std::to_string(s.at.k) + ") outside grid " +
                          grid.describe());
    }
    data[grid.flat(s.at)] += s.amplitude;
  }
  if (pert.noise_sigma > 0.0) {
    std::mt19937_64 rng(pert.seed);
    std::normal_distribution<double> noise(0.0, pert.noise_sigma);
    for (double& v : data) v += noise(rng);
  }
  return RealVolume(grid, std::move(data));
}

double default_spike_amplitude(const RealVolume& clean_psi) {
  return 5.0 * clean_psi.max_abs();
}

}  // namespace qsm
