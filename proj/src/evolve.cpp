#include "terramod/evolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace terramod {

Fitness to_fitness(const ObjectiveVector& o)
{
  return {-static_cast<double>(o.path_cells), o.v_max, o.cost};
}

ObjectiveVector to_objectives(const Fitness& f)
{
  return {static_cast<std::size_t>(-f[0]), f[1], f[2]};
}

void OptimizerConfig::validate() const
{
  if (population_size < 2 || offspring_size == 0)
    throw std::invalid_argument("population_size must be >= 2 and offspring_size >= 1");
  if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
    throw std::invalid_argument("crossover_probability must be in [0, 1]");
  if (mutation_probability && !(*mutation_probability >= 0.0 && *mutation_probability <= 1.0))
    throw std::invalid_argument("mutation_probability must be in [0, 1]");
  if (!(crossover_eta >= 0.0) || !(mutation_eta >= 0.0))
    throw std::invalid_argument("distribution indices must be >= 0");
  if (!(lower_bound < upper_bound))
    throw std::invalid_argument("lower_bound must be < upper_bound");
  if (threads == 0)
    throw std::invalid_argument("threads must be >= 1");
}

double OptimizerConfig::mutation_probability_for(std::size_t n_var) const
{
  if (mutation_probability)
    return *mutation_probability;
  return n_var == 0 ? 0.0 : 1.0 / static_cast<double>(n_var);
}

bool dominates(const Fitness& a, const Fitness& b)
{
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i])
      return false;
    if (a[i] < b[i])
      strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Fitness> points)
{
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  if (n == 0)
    return fronts;

  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(points[p], points[q])) {
        dominated[p].push_back(q);
        ++count[q];
      } else if (dominates(points[q], points[p])) {
        dominated[q].push_back(p);
        ++count[p];
      }
    }

  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p)
    if (count[p] == 0)
      current.push_back(p);

  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (const std::size_t p : current)
      for (const std::size_t q : dominated[p])
        if (--count[q] == 0)
          next.push_back(q);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

namespace {

std::vector<Fitness> fitness_of(const std::vector<Individual>& pop)
{
  std::vector<Fitness> f(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i)
    f[i] = pop[i].fitness;
  return f;
}

} // namespace

std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop)
{
  const auto f = fitness_of(pop);
  auto fronts = non_dominated_sort(std::span<const Fitness>(f));
  for (std::size_t k = 0; k < fronts.size(); ++k)
    for (const std::size_t i : fronts[k])
      pop[i].rank = k;
  return fronts;
}

std::vector<double> crowding_distance(std::span<const Fitness> points,
                                      std::span<const std::size_t> front)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }

  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < points[front[0]].size(); ++m) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return points[front[a]][m] < points[front[b]][m];
    });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double lo = points[front[order.front()]][m];
    const double hi = points[front[order.back()]][m];
    const double range = hi - lo;
    if (!(range > 0.0))
      continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (dist[order[k]] == inf)
        continue;
      dist[order[k]] += (points[front[order[k + 1]]][m] - points[front[order[k - 1]]][m]) / range;
    }
  }
  return dist;
}

void assign_crowding(std::vector<Individual>& pop, std::span<const std::size_t> front)
{
  const auto f = fitness_of(pop);
  const auto d = crowding_distance(std::span<const Fitness>(f), front);
  for (std::size_t k = 0; k < front.size(); ++k)
    pop[front[k]].crowding = d[k];
}

std::size_t tournament_select(std::span<const Individual> pop, Rng& rng)
{
  if (pop.empty())
    throw std::invalid_argument("tournament on an empty population");
  if (pop.size() == 1)
    return 0;
  const std::size_t a = rng.index(pop.size());
  std::size_t b = rng.index(pop.size() - 1);
  if (b >= a)
    ++b;
  const Individual& x = pop[a];
  const Individual& y = pop[b];
  if (x.rank != y.rank)
    return x.rank < y.rank ? a : b;
  if (x.crowding != y.crowding)
    return x.crowding > y.crowding ? a : b;
  return rng.coin() ? a : b;
}

std::pair<double, double> sbx_pair(double x1, double x2, double eta, Rng& rng)
{
  const double u = rng.uniform();
  const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                               : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
  const double c1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2);
  const double c2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2);
  return {c1, c2};
}

std::pair<ModificationPlan, ModificationPlan> sbx_crossover(const ModificationPlan& p1,
                                                            const ModificationPlan& p2,
                                                            const OptimizerConfig& cfg, Rng& rng)
{
  if (p1.size() != p2.size())
    throw std::invalid_argument("SBX parents differ in length");
  ModificationPlan c1 = p1;
  ModificationPlan c2 = p2;
  if (!(rng.uniform() < cfg.crossover_probability))
    return {std::move(c1), std::move(c2)};

  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (!rng.coin())
      continue;
    const double x1 = p1.deltas[i];
    const double x2 = p2.deltas[i];
    if (std::abs(x1 - x2) <= 1e-14)
      continue;
    auto [y1, y2] = sbx_pair(x1, x2, cfg.crossover_eta, rng);
    c1.deltas[i] = std::clamp(y1, cfg.lower_bound, cfg.upper_bound);
    c2.deltas[i] = std::clamp(y2, cfg.lower_bound, cfg.upper_bound);
  }
  return {std::move(c1), std::move(c2)};
}

ModificationPlan polynomial_mutation(const ModificationPlan& p, const OptimizerConfig& cfg,
                                     Rng& rng)
{
  const double prob = cfg.mutation_probability_for(p.size());
  const double lo = cfg.lower_bound;
  const double hi = cfg.upper_bound;
  const double span = hi - lo;
  const double power = 1.0 / (cfg.mutation_eta + 1.0);
  ModificationPlan out = p;
  if (prob <= 0.0)
    return out;

  for (auto& y : out.deltas) {
    if (!(rng.uniform() < prob))
      continue;
    const double d1 = (y - lo) / span;
    const double d2 = (hi - y) / span;
    const double u = rng.uniform();
    double dq;
    if (u <= 0.5) {
      const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, cfg.mutation_eta + 1.0);
      dq = std::pow(v, power) - 1.0;
    } else {
      const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, cfg.mutation_eta + 1.0);
      dq = 1.0 - std::pow(v, power);
    }
    y = std::clamp(y + dq * span, lo, hi);
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

void evaluate_all(std::vector<Individual>& pop, std::size_t first, const Grid& base,
                  const HydroParams& hp, const CostParams& cp, std::size_t threads,
                  std::size_t generation)
{
  const std::size_t n = pop.size() - first;
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      try {
        pop[first + k].fitness = to_fitness(evaluate(base, pop[first + k].plan, hp, cp));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min(threads, n);
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end)
        pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool)
      t.join();
  }

  for (std::size_t k = 0; k < n; ++k)
    if (errors[k]) {
      try {
        std::rethrow_exception(errors[k]);
      } catch (const std::exception& e) {
        throw std::runtime_error("generation " + std::to_string(generation) + ", individual " +
                                 std::to_string(first + k) + ": evaluation failed: " + e.what());
      }
    }
}

void rank_and_crowd(std::vector<Individual>& pop)
{
  const auto fronts = non_dominated_sort(pop);
  for (const auto& f : fronts)
    assign_crowding(pop, f);
}

GenerationStats summarize(const std::vector<Individual>& pop, std::size_t generation)
{
  GenerationStats s;
  s.generation = generation;
  s.min_path_cells = std::numeric_limits<std::size_t>::max();
  s.min_v_max = s.min_cost = std::numeric_limits<double>::infinity();
  s.max_v_max = s.max_cost = -std::numeric_limits<double>::infinity();
  for (const auto& ind : pop) {
    if (ind.rank == 0)
      ++s.front_size;
    const auto o = ind.objectives();
    s.min_path_cells = std::min(s.min_path_cells, o.path_cells);
    s.max_path_cells = std::max(s.max_path_cells, o.path_cells);
    s.min_v_max = std::min(s.min_v_max, o.v_max);
    s.max_v_max = std::max(s.max_v_max, o.v_max);
    s.min_cost = std::min(s.min_cost, o.cost);
    s.max_cost = std::max(s.max_cost, o.cost);
  }
  return s;
}

std::vector<Individual> first_front(const std::vector<Individual>& pop)
{
  // Identical genomes are reported once.
  std::vector<Individual> out;
  for (const auto& ind : pop)
    if (ind.rank == 0 && std::none_of(out.begin(), out.end(),
                                      [&](const Individual& o) { return o.plan == ind.plan; }))
      out.push_back(ind);
  return out;
}

std::vector<Individual> survive(std::vector<Individual> merged, std::size_t capacity)
{
  const auto fronts = non_dominated_sort(merged);
  std::vector<Individual> next;
  next.reserve(capacity);
  for (const auto& front : fronts) {
    if (next.size() + front.size() <= capacity) {
      for (const std::size_t i : front)
        next.push_back(std::move(merged[i]));
      if (next.size() == capacity)
        break;
      continue;
    }
    assign_crowding(merged, front);
    std::vector<std::size_t> order(front.begin(), front.end());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return merged[a].crowding > merged[b].crowding;
    });
    const std::size_t remaining = capacity - next.size();
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<long>(remaining));
    std::sort(chosen.begin(), chosen.end());
    for (const std::size_t i : chosen)
      next.push_back(std::move(merged[i]));
    break;
  }
  rank_and_crowd(next);
  return next;
}

} // namespace

ParetoArchive run_nsga2(const Grid& base, const HydroParams& hp, const CostParams& cp,
                        const OptimizerConfig& cfg, const ProgressFn& progress)
{
  cfg.validate();
  hp.validate();
  cp.validate();
  const std::size_t n_var = variable_count(base);
  if (n_var == 0)
    throw std::invalid_argument("no valid cells");

  ParetoArchive archive;
  archive.config = cfg;
  archive.n_var = n_var;
  archive.baseline = evaluate(base, zero_plan(base), hp, cp);

  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };
  auto record = [&](const std::vector<Individual>& pop, std::size_t g) {
    GenerationStats s = summarize(pop, g);
    s.wall_ms = elapsed_ms();
    archive.history.push_back(s);
    if (std::find(cfg.snapshot_generations.begin(), cfg.snapshot_generations.end(), g) !=
        cfg.snapshot_generations.end())
      archive.snapshots[g] = first_front(pop);
    if (progress)
      progress(s, pop);
  };

  std::vector<Individual> pop(cfg.population_size);
  {
    Rng rng = Rng::stream(cfg.rng_seed, 0);
    for (std::size_t k = 0; k < pop.size(); ++k) {
      pop[k].plan.deltas.resize(n_var);
      if (k == 0 && cfg.seed_with_zero_plan) {
        std::fill(pop[k].plan.deltas.begin(), pop[k].plan.deltas.end(), 0.0);
        continue;
      }
      for (auto& d : pop[k].plan.deltas)
        d = rng.uniform(cfg.lower_bound, cfg.upper_bound);
    }
  }
  evaluate_all(pop, 0, base, hp, cp, cfg.threads, 0);
  rank_and_crowd(pop);
  record(pop, 0);

  for (std::size_t g = 1; g <= cfg.generations; ++g) {
    Rng rng = Rng::stream(cfg.rng_seed, g);
    std::vector<Individual> merged = pop;
    merged.reserve(pop.size() + cfg.offspring_size);
    while (merged.size() < pop.size() + cfg.offspring_size) {
      const Individual& a = pop[tournament_select(pop, rng)];
      const Individual& b = pop[tournament_select(pop, rng)];
      auto [c1, c2] = sbx_crossover(a.plan, b.plan, cfg, rng);
      merged.push_back({polynomial_mutation(c1, cfg, rng), {}, 0, 0.0});
      if (merged.size() < pop.size() + cfg.offspring_size)
        merged.push_back({polynomial_mutation(c2, cfg, rng), {}, 0, 0.0});
    }
    evaluate_all(merged, pop.size(), base, hp, cp, cfg.threads, g);
    pop = survive(std::move(merged), cfg.population_size);
    record(pop, g);
  }

  archive.members = first_front(pop);
  return archive;
}

} // namespace terramod
