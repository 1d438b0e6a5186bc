#pragma once

#include "terramod/decision.hpp"
#include "terramod/evolve.hpp"
#include "terramod/hydrology.hpp"
#include "terramod/objectives.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace terramod {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Everything a batch run needs. Serializes to a flat `key = value` file.
struct RunConfig
{
  std::string dem_path;
  std::string output_dir = "run";
  HydroParams hydro;
  CostParams cost;
  /// Unset: use the DEM's cell_size squared.
  std::optional<double> cell_area;
  OptimizerConfig optimizer;
  bool write_snapshot_rasters = false;
  Weights weights{1.0, 1.0, 1.0};
  double rho = 1e-4;
  std::size_t every_k = 10;

  /// Sets one key from its textual value. Throws ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Throws ConfigError when an embedded invariant is violated.
  void validate() const;
  /// Cost parameters with cell_area resolved against the DEM.
  CostParams resolved_cost(const Grid& dem) const;
};

/// Parses `key = value` lines; `#` starts a comment. Keys prefixed with
/// `run.` are run metadata and are ignored.
void apply_config_text(RunConfig& cfg, std::string_view text);
RunConfig load_config_file(const std::string& path);
std::string format_config(const RunConfig& cfg);

} // namespace terramod
