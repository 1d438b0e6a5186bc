#include "terramod/objectives.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace terramod {

ModificationPlan ModificationPlan::negated() const
{
  ModificationPlan out = *this;
  for (auto& d : out.deltas)
    d = -d;
  return out;
}

ModificationPlan ModificationPlan::scaled(double factor) const
{
  ModificationPlan out = *this;
  for (auto& d : out.deltas)
    d *= factor;
  return out;
}

ModificationPlan zero_plan(const Grid& base)
{
  return {std::vector<double>(variable_count(base), 0.0)};
}

void CostParams::validate() const
{
  if (!(unit_price > 0.0))
    throw std::invalid_argument("unit_price must be > 0");
  if (!(cell_area > 0.0))
    throw std::invalid_argument("cell_area must be > 0");
}

Grid apply_plan(const Grid& base, const ModificationPlan& plan)
{
  std::vector<double> z = base.values();
  const double nodata = base.nodata();
  std::size_t k = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!base.valid(i))
      continue;
    if (k == plan.size())
      throw std::invalid_argument("plan has " + std::to_string(plan.size()) +
                                  " deltas; base grid has more valid cells");
    double v = base[i] + plan.deltas[k++];
    if (v == nodata)
      v = std::nextafter(v, std::numeric_limits<double>::infinity());
    z[i] = v;
  }
  if (k != plan.size())
    throw std::invalid_argument("plan has " + std::to_string(plan.size()) + " deltas; base grid has " +
                                std::to_string(k) + " valid cells");
  return base.with_values(std::move(z));
}

double earthwork_cost(const ModificationPlan& plan, const CostParams& cp)
{
  double total = 0.0;
  for (const double e : plan.deltas)
    total += std::abs(e) * cp.cell_area * cp.unit_price;
  return total;
}

ObjectiveVector evaluate(const Grid& base, const ModificationPlan& plan, const HydroParams& hp,
                         const CostParams& cp)
{
  const Grid modified = apply_plan(base, plan);
  const HydrologyResult h = run_hydrology(modified, hp, cp.cell_area);
  return {h.path.count, h.max_velocity, earthwork_cost(plan, cp)};
}

Grid plan_to_grid(const Grid& base, const ModificationPlan& plan)
{
  if (plan.size() != variable_count(base))
    throw std::invalid_argument("plan length does not match the base grid's valid cells");
  GridGeometry geo = base.geometry();
  geo.nodata = kDerivedNodata;
  std::vector<double> v(base.size(), kDerivedNodata);
  std::size_t k = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (base.valid(i))
      v[i] = plan.deltas[k++];
  return Grid(geo, std::move(v));
}

ModificationPlan plan_from_grid(const Grid& base, const Grid& deltas)
{
  if (deltas.n_rows() != base.n_rows() || deltas.n_cols() != base.n_cols())
    throw std::invalid_argument("delta raster dimensions differ from the base grid");
  ModificationPlan plan;
  plan.deltas.reserve(variable_count(base));
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base.valid(i) != deltas.valid(i))
      throw std::invalid_argument("delta raster validity differs from the base grid at cell " +
                                  std::to_string(i));
    if (base.valid(i))
      plan.deltas.push_back(deltas[i]);
  }
  return plan;
}

} // namespace terramod
