#pragma once

#include "terramod/raster.hpp"

#include <cstdint>

namespace terramod {

/// Parameters of the benchmark terrain: a plane tilted down towards the
/// south-east plus a seeded sum of Gaussian bumps and pits.
///
///   z(r, c) = base - tilt_east * x - tilt_south * y
///             + sum_k a_k * exp(-((r - r_k)^2 + (c - c_k)^2) / (2 s_k^2))
///
/// with x, y the cell-centre offsets in metres from the north-west corner,
/// a_k uniform in [-amplitude, amplitude], (r_k, c_k) uniform over the grid and
/// s_k uniform in [0.5, 1.5] * bump_radius (cells).
struct SyntheticDemSpec
{
  std::size_t rows = 40;
  std::size_t cols = 40;
  double cell_size = 10.0;
  double base_elevation = 50.0;
  double tilt_east = 0.01;
  double tilt_south = 0.005;
  double amplitude = 1.5;
  std::size_t bumps = 16;
  double bump_radius = 4.0;
  std::uint64_t seed = 20240611;
};

Grid synthetic_dem(const SyntheticDemSpec& spec);

} // namespace terramod
