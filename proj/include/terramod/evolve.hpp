#pragma once

#include "terramod/hydrology.hpp"
#include "terramod/objectives.hpp"
#include "terramod/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace terramod {

/// Objectives in minimization sense: (-path_cells, v_max, cost).
using Fitness = std::array<double, 3>;

Fitness to_fitness(const ObjectiveVector& o);
ObjectiveVector to_objectives(const Fitness& f);

struct OptimizerConfig
{
  std::size_t population_size = 200;
  std::size_t offspring_size = 100;
  std::size_t generations = 300;
  double crossover_probability = 0.9;
  double crossover_eta = 15.0;
  /// Per-variable mutation probability; unset means 1 / N_var.
  std::optional<double> mutation_probability;
  double mutation_eta = 20.0;
  std::uint64_t rng_seed = 1;
  double lower_bound = -2.0;
  double upper_bound = 2.0;
  bool seed_with_zero_plan = true;
  std::vector<std::size_t> snapshot_generations = {50, 100, 200, 300};
  /// Worker threads for offspring evaluation. Results do not depend on it.
  std::size_t threads = 1;

  void validate() const;
  double mutation_probability_for(std::size_t n_var) const;
};

struct Individual
{
  ModificationPlan plan;
  Fitness fitness{};
  std::size_t rank = 0;
  double crowding = 0.0;

  ObjectiveVector objectives() const { return to_objectives(fitness); }
};

struct GenerationStats
{
  std::size_t generation = 0;
  std::size_t front_size = 0;
  std::size_t min_path_cells = 0;
  std::size_t max_path_cells = 0;
  double min_v_max = 0.0;
  double max_v_max = 0.0;
  double min_cost = 0.0;
  double max_cost = 0.0;
  double wall_ms = 0.0;
};

struct ParetoArchive
{
  std::vector<Individual> members;
  OptimizerConfig config;
  std::size_t n_var = 0;
  ObjectiveVector baseline;
  std::vector<GenerationStats> history;
  /// Rank-0 members of the population after each snapshot generation.
  std::map<std::size_t, std::vector<Individual>> snapshots;
};

/// a <= b everywhere and a < b somewhere.
bool dominates(const Fitness& a, const Fitness& b);

/// Fast non-dominated sort. Fronts hold indices into `points`, each front
/// in ascending index order.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Fitness> points);

/// Sorts `pop` into fronts and writes each member's rank.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop);

/// Crowding distance of each member of `front` (indices into `points`),
/// returned in the order of `front`.
std::vector<double> crowding_distance(std::span<const Fitness> points,
                                      std::span<const std::size_t> front);

/// Writes crowding distances for one front of `pop`.
void assign_crowding(std::vector<Individual>& pop, std::span<const std::size_t> front);

/// Binary tournament on (rank, crowding), coin flip on a full tie.
/// Returns an index into `pop`.
std::size_t tournament_select(std::span<const Individual> pop, Rng& rng);

/// One SBX draw on a single variable, without bounds. c1 + c2 == x1 + x2
/// up to rounding.
std::pair<double, double> sbx_pair(double x1, double x2, double eta, Rng& rng);

std::pair<ModificationPlan, ModificationPlan> sbx_crossover(const ModificationPlan& p1,
                                                            const ModificationPlan& p2,
                                                            const OptimizerConfig& cfg, Rng& rng);

ModificationPlan polynomial_mutation(const ModificationPlan& p, const OptimizerConfig& cfg,
                                     Rng& rng);

using ProgressFn = std::function<void(const GenerationStats&, const std::vector<Individual>&)>;

ParetoArchive run_nsga2(const Grid& base, const HydroParams& hp, const CostParams& cp,
                        const OptimizerConfig& cfg, const ProgressFn& progress = {});

} // namespace terramod
