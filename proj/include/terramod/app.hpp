#pragma once

#include "terramod/config.hpp"
#include "terramod/evolve.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace terramod {

/// Missing, unreadable or malformed input files (exit code 3).
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int
{
  kExitOk = 0,
  kExitConfig = 2,
  kExitInput = 3,
  kExitRuntime = 4,
};

/// FNV-1a over the IEEE-754 bit patterns of the deltas, as 16 hex digits.
std::string plan_checksum(const ModificationPlan& plan);

Grid load_dem(const std::string& path);

void cmd_analyze(const RunConfig& cfg, std::ostream& out);
ParetoArchive cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& log);

struct PickOptions
{
  std::string run_dir;
  std::string output_dir; // empty: <run_dir>/pick
  Weights weights{1.0, 1.0, 1.0};
  double rho = 1e-4;
  std::size_t every_k = 10;
};
void cmd_pick(const PickOptions& opts, std::ostream& out);

/// A stored archive member as read back from a run directory.
struct StoredMember
{
  std::size_t id = 0;
  ObjectiveVector objectives;
  std::string checksum;
  ModificationPlan plan;
};

struct StoredRun
{
  RunConfig config;
  Grid base;
  std::vector<StoredMember> members;
};

/// Reads manifest.txt, base_dem.asc, pareto.csv and genomes/ of a run.
/// Throws InputError on missing or inconsistent artifacts.
StoredRun load_run(const std::string& run_dir);

/// Entry point shared by the executable and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace terramod
