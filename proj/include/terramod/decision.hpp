#pragma once

#include "terramod/evolve.hpp"

#include <array>
#include <span>
#include <vector>

namespace terramod {

/// Objectives mapped to [0, 1] by the front's own ideal and nadir points.
struct NormalizedFront
{
  Fitness ideal{};
  Fitness nadir{};
  std::vector<Fitness> points;
};

NormalizedFront normalize(std::span<const Fitness> front);
NormalizedFront normalize(std::span<const Individual> members);

/// Archive indices of the single-objective optima.
struct ObjectivePicks
{
  std::size_t max_path = 0;
  std::size_t min_velocity = 0;
  std::size_t min_cost = 0;
};

/// Ties are broken by lower cost, then by lower index.
ObjectivePicks best_per_objective(std::span<const Individual> members);

using Weights = std::array<double, 3>;

/// max_i(f_i / w_i) + rho * sum_i(f_i / w_i) on normalized objectives.
double aasf_score(const Fitness& normalized, const Weights& w, double rho);

/// Index of the member minimizing the AASF score. Equal weights give the
/// balanced solution.
std::size_t aasf_pick(std::span<const Individual> members, const Weights& w, double rho);

/// Indices 0, k, 2k, ... of the members sorted by ascending cost.
std::vector<std::size_t> sample_interval(std::span<const Individual> members, std::size_t k);

} // namespace terramod
