#include "terramod/synthetic.hpp"

#include "terramod/rng.hpp"

#include <cmath>
#include <vector>

namespace terramod {

Grid synthetic_dem(const SyntheticDemSpec& spec)
{
  struct Bump
  {
    double row, col, amp, sigma;
  };
  Rng rng(spec.seed);
  std::vector<Bump> bumps(spec.bumps);
  for (auto& b : bumps) {
    b.row = rng.uniform(0.0, static_cast<double>(spec.rows));
    b.col = rng.uniform(0.0, static_cast<double>(spec.cols));
    b.amp = rng.uniform(-spec.amplitude, spec.amplitude);
    b.sigma = rng.uniform(0.5, 1.5) * spec.bump_radius;
  }

  GridGeometry geo;
  geo.n_rows = spec.rows;
  geo.n_cols = spec.cols;
  geo.cell_size = spec.cell_size;
  geo.nodata = -9999.0;
  std::vector<double> z(geo.size());
  for (std::size_t r = 0; r < spec.rows; ++r)
    for (std::size_t c = 0; c < spec.cols; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * spec.cell_size;
      const double y = (static_cast<double>(r) + 0.5) * spec.cell_size;
      double v = spec.base_elevation - spec.tilt_east * x - spec.tilt_south * y;
      for (const auto& b : bumps) {
        const double dr = static_cast<double>(r) - b.row;
        const double dc = static_cast<double>(c) - b.col;
        v += b.amp * std::exp(-(dr * dr + dc * dc) / (2.0 * b.sigma * b.sigma));
      }
      z[r * spec.cols + c] = v;
    }
  return Grid(geo, std::move(z));
}

} // namespace terramod
