#include "terramod/hydrology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

namespace terramod {

namespace {

GridGeometry derived_geometry(const GridGeometry& g)
{
  GridGeometry out = g;
  out.nodata = kDerivedNodata;
  return out;
}

// Moves a computed elevation off the nodata sentinel so the cell stays valid.
double avoid_sentinel(double v, double nodata)
{
  return v == nodata ? std::nextafter(v, std::numeric_limits<double>::infinity()) : v;
}

bool is_seed(const Grid& g, std::size_t r, std::size_t c)
{
  if (r == 0 || c == 0 || r + 1 == g.n_rows() || c + 1 == g.n_cols())
    return true;
  for (const auto& o : kD8Offsets) {
    const CellIndex n{static_cast<std::size_t>(static_cast<long>(r) + o.drow),
                      static_cast<std::size_t>(static_cast<long>(c) + o.dcol)};
    if (!g.valid(n))
      return true;
  }
  return false;
}

} // namespace

FlowField::FlowField(GridGeometry geometry, std::vector<std::uint8_t> codes, std::vector<bool> valid)
  : geometry_(geometry), codes_(std::move(codes)), valid_(std::move(valid))
{
  if (codes_.size() != geometry_.size() || valid_.size() != geometry_.size())
    throw std::invalid_argument("flow field size does not match geometry");
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    const auto code = codes_[i];
    if (code != 0 && (code & (code - 1)) != 0)
      throw std::invalid_argument("invalid D8 code " + std::to_string(code));
    if (!valid_[i] && code != 0)
      throw std::invalid_argument("nodata cell with a flow direction");
    if (code == 0)
      continue;
    const auto k = static_cast<std::size_t>(std::countr_zero(code));
    const long r = static_cast<long>(i / geometry_.n_cols) + kD8Offsets[k].drow;
    const long c = static_cast<long>(i % geometry_.n_cols) + kD8Offsets[k].dcol;
    if (r < 0 || c < 0 || r >= static_cast<long>(geometry_.n_rows) ||
        c >= static_cast<long>(geometry_.n_cols) ||
        !valid_[static_cast<std::size_t>(r) * geometry_.n_cols + static_cast<std::size_t>(c)])
      throw std::invalid_argument("flow direction at cell " + std::to_string(i) +
                                  " leaves the valid domain");
  }
}

std::optional<std::size_t> FlowField::downstream(std::size_t i) const
{
  const auto code = codes_[i];
  if (code == 0)
    return std::nullopt;
  const auto& o = kD8Offsets[std::countr_zero(code)];
  const std::size_t r = i / geometry_.n_cols + o.drow;
  const std::size_t c = i % geometry_.n_cols + o.dcol;
  return r * geometry_.n_cols + c;
}

Grid FlowField::to_grid() const
{
  std::vector<double> v(codes_.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = valid_[i] ? static_cast<double>(codes_[i]) : kDerivedNodata;
  return Grid(derived_geometry(geometry_), std::move(v));
}

void HydroParams::validate() const
{
  if (!(manning_n > 0.0))
    throw std::invalid_argument("manning_n must be > 0");
  if (!(channel_width > 0.0))
    throw std::invalid_argument("channel_width must be > 0");
  if (!(rain_intensity >= 0.0))
    throw std::invalid_argument("rain_intensity must be >= 0");
  if (!(accumulation_threshold_fraction > 0.0 && accumulation_threshold_fraction <= 1.0))
    throw std::invalid_argument("threshold fraction must be in (0, 1]");
  if (!(fill_epsilon >= 0.0))
    throw std::invalid_argument("fill_epsilon must be >= 0");
}

Grid fill_depressions(const Grid& dem, double epsilon)
{
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("fill epsilon must be >= 0");
  const std::size_t rows = dem.n_rows();
  const std::size_t cols = dem.n_cols();
  const double nodata = dem.nodata();

  std::vector<double> z = dem.values();
  std::vector<char> closed(z.size(), 0);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  std::size_t n_valid = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (!dem.valid(i))
        continue;
      ++n_valid;
      if (is_seed(dem, r, c)) {
        closed[i] = 1;
        open.emplace(z[i], i);
      }
    }
  if (n_valid == 0)
    throw std::invalid_argument("no valid cells");

  while (!open.empty()) {
    const auto [level, i] = open.top();
    open.pop();
    const long r = static_cast<long>(i / cols);
    const long c = static_cast<long>(i % cols);
    for (const auto& o : kD8Offsets) {
      const long nr = r + o.drow;
      const long nc = c + o.dcol;
      if (!dem.in_bounds(nr, nc))
        continue;
      const std::size_t n = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
      if (closed[n] || !dem.valid(n))
        continue;
      closed[n] = 1;
      if (z[n] <= level) {
        double raised = level + epsilon;
        if (epsilon > 0.0 && raised <= level)
          raised = std::nextafter(level, std::numeric_limits<double>::infinity());
        z[n] = avoid_sentinel(raised, nodata);
      }
      open.emplace(z[n], n);
    }
  }
  return dem.with_values(std::move(z));
}

FlowField flow_directions(const Grid& filled_dem)
{
  const std::size_t rows = filled_dem.n_rows();
  const std::size_t cols = filled_dem.n_cols();
  const double cs = filled_dem.cell_size();
  const double dist[2] = {cs, cs * std::sqrt(2.0)};

  std::vector<std::uint8_t> codes(filled_dem.size(), 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (!filled_dem.valid(i))
        continue;
      const double z = filled_dem[i];
      double best = 0.0;
      std::uint8_t code = 0;
      for (std::size_t k = 0; k < 8; ++k) {
        const auto& o = kD8Offsets[k];
        const long nr = static_cast<long>(r) + o.drow;
        const long nc = static_cast<long>(c) + o.dcol;
        if (!filled_dem.in_bounds(nr, nc))
          continue;
        const std::size_t n = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
        if (!filled_dem.valid(n))
          continue;
        const double drop = z - filled_dem[n];
        if (!(drop > 0.0))
          continue;
        const double gradient = drop / dist[o.diagonal];
        if (gradient > best) {
          best = gradient;
          code = static_cast<std::uint8_t>(1u << k);
        }
      }
      codes[i] = code;
    }
  return FlowField(filled_dem.geometry(), std::move(codes), filled_dem.valid_mask());
}

Grid flow_accumulation(const FlowField& ff)
{
  const std::size_t n = ff.size();
  std::vector<std::uint32_t> indegree(n, 0);
  std::vector<std::size_t> down(n, n);
  std::size_t n_valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ff.valid(i))
      continue;
    ++n_valid;
    if (auto d = ff.downstream(i)) {
      down[i] = *d;
      ++indegree[*d];
    }
  }

  std::vector<double> acc(n, kDerivedNodata);
  std::vector<std::size_t> ready;
  ready.reserve(n_valid);
  for (std::size_t i = 0; i < n; ++i)
    if (ff.valid(i)) {
      acc[i] = 0.0;
      if (indegree[i] == 0)
        ready.push_back(i);
    }

  std::size_t processed = 0;
  while (!ready.empty()) {
    const std::size_t i = ready.back();
    ready.pop_back();
    ++processed;
    const std::size_t d = down[i];
    if (d == n)
      continue;
    acc[d] += acc[i] + 1.0;
    if (--indegree[d] == 0)
      ready.push_back(d);
  }
  if (processed != n_valid)
    throw std::logic_error("flow directions contain a cycle (" +
                           std::to_string(n_valid - processed) +
                           " cells never drained); was the DEM depression-filled?");

  return Grid(derived_geometry(ff.geometry()), std::move(acc));
}

Grid FlowPath::to_grid(const GridGeometry& geometry, const std::vector<bool>& valid) const
{
  std::vector<double> v(mask.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = valid[i] ? (mask[i] ? 1.0 : 0.0) : kDerivedNodata;
  return Grid(derived_geometry(geometry), std::move(v));
}

FlowPath extract_flow_path(const Grid& acc, double fraction)
{
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("threshold fraction must be in (0, 1]");
  FlowPath out;
  out.mask.assign(acc.size(), false);
  for (std::size_t i = 0; i < acc.size(); ++i)
    if (acc.valid(i))
      out.max_accumulation = std::max(out.max_accumulation, acc[i]);
  out.threshold = fraction * out.max_accumulation;
  if (out.max_accumulation <= 0.0)
    return out;
  for (std::size_t i = 0; i < acc.size(); ++i)
    if (acc.valid(i) && acc[i] > 0.0 && acc[i] >= out.threshold) {
      out.mask[i] = true;
      ++out.count;
    }
  return out;
}

Grid slope(const Grid& dem)
{
  const std::size_t rows = dem.n_rows();
  const std::size_t cols = dem.n_cols();
  const double denom = 8.0 * dem.cell_size();
  std::vector<double> out(dem.size(), kDerivedNodata);

  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (!dem.valid(i))
        continue;
      const double z0 = dem[i];
      auto z = [&](int dr, int dc) {
        const long nr = static_cast<long>(r) + dr;
        const long nc = static_cast<long>(c) + dc;
        if (!dem.in_bounds(nr, nc))
          return z0;
        const std::size_t n = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
        return dem.valid(n) ? dem[n] : z0;
      };
      // a b c
      // d . f
      // g h i
      const double a = z(-1, -1), b = z(-1, 0), cc = z(-1, 1);
      const double d = z(0, -1), f = z(0, 1);
      const double g = z(1, -1), h = z(1, 0), ii = z(1, 1);
      const double dzdx = ((cc + 2.0 * f + ii) - (a + 2.0 * d + g)) / denom;
      const double dzdy = ((g + 2.0 * h + ii) - (a + 2.0 * b + cc)) / denom;
      out[i] = std::sqrt(dzdx * dzdx + dzdy * dzdy);
    }
  return Grid(derived_geometry(dem.geometry()), std::move(out));
}

double manning_velocity(double slope, double manning_n, double discharge, double channel_area)
{
  if (slope <= 0.0 || discharge <= 0.0)
    return 0.0;
  const double inner = std::sqrt(slope) / manning_n * std::pow(discharge / channel_area, 2.0 / 3.0);
  return std::pow(inner, 3.0 / 5.0);
}

Grid runoff_velocity(const Grid& slope_grid, const Grid& acc, const HydroParams& p, double cell_area)
{
  if (slope_grid.n_rows() != acc.n_rows() || slope_grid.n_cols() != acc.n_cols())
    throw std::invalid_argument("slope and accumulation grids are not congruent");
  p.validate();
  const double slope_scale = p.slope_as_percent ? 100.0 : 1.0;
  std::vector<double> v(slope_grid.size(), kDerivedNodata);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!slope_grid.valid(i) || !acc.valid(i))
      continue;
    const double q = (acc[i] + 1.0) * p.rain_intensity * cell_area;
    v[i] = manning_velocity(slope_grid[i] * slope_scale, p.manning_n, q, p.channel_width);
  }
  return Grid(derived_geometry(slope_grid.geometry()), std::move(v));
}

double max_velocity(const Grid& v)
{
  bool any = false;
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.valid(i)) {
      best = any ? std::max(best, v[i]) : v[i];
      any = true;
    }
  if (!any)
    throw std::invalid_argument("no valid cells");
  return best;
}

HydrologyResult run_hydrology(const Grid& dem, const HydroParams& p, double cell_area)
{
  p.validate();
  Grid filled = fill_depressions(dem, p.fill_epsilon);
  FlowField directions = flow_directions(filled);
  Grid acc = flow_accumulation(directions);
  FlowPath path = extract_flow_path(acc, p.accumulation_threshold_fraction);
  Grid s = slope(filled);
  Grid v = runoff_velocity(s, acc, p, cell_area);
  const double vmax = max_velocity(v);
  return {std::move(filled), std::move(directions), std::move(acc), std::move(path),
          std::move(s), std::move(v), vmax};
}

} // namespace terramod
