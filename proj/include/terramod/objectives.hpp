#pragma once

#include "terramod/hydrology.hpp"
#include "terramod/raster.hpp"

#include <cstddef>
#include <vector>

namespace terramod {

/// Per-valid-cell elevation changes (m), in row-major order of the base
/// grid's valid cells. Positive values fill, negative values cut.
struct ModificationPlan
{
  std::vector<double> deltas;

  std::size_t size() const { return deltas.size(); }
  ModificationPlan negated() const;
  ModificationPlan scaled(double factor) const;

  bool operator==(const ModificationPlan&) const = default;
};

ModificationPlan zero_plan(const Grid& base);

/// Number of decision variables: rows * cols minus nodata cells.
inline std::size_t variable_count(const Grid& base) { return base.valid_count(); }

struct ObjectiveVector
{
  std::size_t path_cells = 0; // maximize
  double v_max = 0.0;         // minimize, m/s
  double cost = 0.0;          // minimize, currency units

  bool operator==(const ObjectiveVector&) const = default;
};

struct CostParams
{
  double unit_price = 100.0; // per m^3
  double cell_area = 100.0;  // m^2

  void validate() const;
};

/// base + delta on valid cells; nodata cells untouched.
Grid apply_plan(const Grid& base, const ModificationPlan& plan);

/// Sum of |delta| * cell_area * unit_price.
double earthwork_cost(const ModificationPlan& plan, const CostParams& cp);

ObjectiveVector evaluate(const Grid& base, const ModificationPlan& plan, const HydroParams& hp,
                         const CostParams& cp);

/// Delta raster congruent with `base` (nodata cells carry kDerivedNodata).
Grid plan_to_grid(const Grid& base, const ModificationPlan& plan);
/// Inverse of plan_to_grid. Throws std::invalid_argument if the raster does
/// not line up with the valid cells of `base`.
ModificationPlan plan_from_grid(const Grid& base, const Grid& deltas);

} // namespace terramod
