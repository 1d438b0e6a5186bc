#pragma once

#include "terramod/raster.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace terramod {

/// Nodata sentinel for rasters derived from a DEM (accumulation, slope,
/// velocity, masks). Derived quantities are never negative.
inline constexpr double kDerivedNodata = -9999.0;

/// D8 direction codes. OUTLET marks cells that drain nowhere (and nodata).
enum class D8 : std::uint8_t
{
  Outlet = 0,
  E = 1,
  SE = 2,
  S = 4,
  SW = 8,
  W = 16,
  NW = 32,
  N = 64,
  NE = 128,
};

/// Per-cell flow directions with the validity mask of the DEM they came from.
class FlowField
{
public:
  FlowField(GridGeometry geometry, std::vector<std::uint8_t> codes, std::vector<bool> valid);

  const GridGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return codes_.size(); }
  D8 code(std::size_t i) const { return static_cast<D8>(codes_[i]); }
  const std::vector<std::uint8_t>& codes() const { return codes_; }
  bool valid(std::size_t i) const { return valid_[i]; }

  /// Index of the cell `i` drains into, or nullopt for OUTLET.
  std::optional<std::size_t> downstream(std::size_t i) const;

  /// Codes as a raster (nodata cells carry kDerivedNodata).
  Grid to_grid() const;

private:
  GridGeometry geometry_;
  std::vector<std::uint8_t> codes_;
  std::vector<bool> valid_;
};

struct HydroParams
{
  double manning_n = 0.1;
  /// Channel area parameter B of the Manning relation (m^2).
  double channel_width = 1.0;
  /// Design storm intensity in m/s (1e-5 m/s = 36 mm/h).
  double rain_intensity = 1e-5;
  double accumulation_threshold_fraction = 0.02;
  double fill_epsilon = 1e-5;
  /// Feed slope to the velocity relation in percent instead of rise/run.
  bool slope_as_percent = false;

  /// Throws std::invalid_argument on a violated constraint.
  void validate() const;
};

/// Priority-flood depression filling.
///
/// Seeds are valid cells on the grid edge or next to nodata. A cell reached
/// from a neighbour at or above its own elevation is raised to that
/// neighbour's level plus `epsilon`, so with epsilon > 0 every valid cell has
/// a strictly descending path to a seed. Cells outside depressions keep their
/// input value.
Grid fill_depressions(const Grid& dem, double epsilon);

/// Steepest-descent D8 directions. Ties go to the first code in E, SE, S, SW,
/// W, NW, N, NE order; cells without a strictly lower neighbour are OUTLET.
FlowField flow_directions(const Grid& filled_dem);

/// Exclusive upstream cell counts (headwaters are 0). Throws std::logic_error
/// if the directions contain a cycle.
Grid flow_accumulation(const FlowField& ff);

struct FlowPath
{
  std::vector<bool> mask;
  std::size_t count = 0;
  double threshold = 0.0;
  double max_accumulation = 0.0;

  Grid to_grid(const GridGeometry& geometry, const std::vector<bool>& valid) const;
};

/// Cells with acc >= fraction * max(acc) and acc > 0.
FlowPath extract_flow_path(const Grid& acc, double fraction);

/// Horn's 3x3 gradient magnitude as rise/run. Missing neighbours (off-grid
/// or nodata) take the centre value.
Grid slope(const Grid& dem);

/// V = [sqrt(S)/n * (Q/B)^(2/3)]^(3/5); zero when S or Q is zero.
double manning_velocity(double slope, double manning_n, double discharge, double channel_area);

/// Per-cell velocity with Q = (acc + 1) * rain_intensity * cell_area.
Grid runoff_velocity(const Grid& slope, const Grid& acc, const HydroParams& p, double cell_area);

/// Maximum over valid cells. Throws std::invalid_argument if there are none.
double max_velocity(const Grid& v);

/// Every intermediate product of one pass through the pipeline.
struct HydrologyResult
{
  Grid filled;
  FlowField directions;
  Grid accumulation;
  FlowPath path;
  Grid slope;
  Grid velocity;
  double max_velocity = 0.0;
};

HydrologyResult run_hydrology(const Grid& dem, const HydroParams& p, double cell_area);

} // namespace terramod
