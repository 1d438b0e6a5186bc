#include "terramod/decision.hpp"
#include "terramod/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace terramod;

namespace {

Individual member(double neg_path, double vmax, double cost)
{
  return {ModificationPlan{}, Fitness{neg_path, vmax, cost}, 0, 0.0};
}

std::vector<Individual> random_front(Rng& rng, std::size_t n)
{
  std::vector<Individual> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(member(-static_cast<double>(500 + rng.index(200)), rng.uniform(0.5, 1.5),
                         rng.uniform(1e6, 6e6)));
  return out;
}

} // namespace

TEST_CASE("normalization maps the front to the unit cube")
{
  const std::vector<Fitness> f = {{-10, 1, 5}, {-20, 3, 5}, {-15, 2, 5}};
  const NormalizedFront nf = normalize(std::span<const Fitness>(f));
  CHECK(nf.ideal == Fitness{-20, 1, 5});
  CHECK(nf.nadir == Fitness{-10, 3, 5});
  CHECK(nf.points[0] == Fitness{1.0, 0.0, 0.0});
  CHECK(nf.points[1] == Fitness{0.0, 1.0, 0.0});
  CHECK(nf.points[2] == Fitness{0.5, 0.5, 0.0});
}

TEST_CASE("best per objective")
{
  const std::vector<Individual> one = {member(-5, 1, 2)};
  const auto p1 = best_per_objective(one);
  CHECK(p1.max_path == 0);
  CHECK(p1.min_velocity == 0);
  CHECK(p1.min_cost == 0);

  const std::vector<Individual> pop = {member(-10, 1.0, 50), member(-12, 1.2, 80),
                                       member(-12, 1.3, 70), member(-8, 0.9, 0)};
  const auto p = best_per_objective(pop);
  CHECK(p.max_path == 2); // tie on path broken by cost
  CHECK(p.min_velocity == 3);
  CHECK(p.min_cost == 3);
  CHECK(pop[p.min_cost].fitness[2] == 0.0);

  CHECK_THROWS(best_per_objective(std::vector<Individual>{}));

  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto front = random_front(rng, 40);
    const auto picks = best_per_objective(front);
    const std::array<std::size_t, 3> idx{picks.max_path, picks.min_velocity, picks.min_cost};
    for (std::size_t m = 0; m < 3; ++m)
      for (const auto& x : front)
        CHECK(front[idx[m]].fitness[m] <= x.fitness[m]);
  }
}

TEST_CASE("AASF scoring")
{
  const Weights eq{1, 1, 1};
  // Member 1 sits at the ideal point.
  const std::vector<Individual> ideal = {member(-1, 2, 3), member(-3, 1, 1), member(-2, 1.5, 2)};
  CHECK(aasf_pick(ideal, eq, 1e-4) == 1);

  CHECK(aasf_score({0.2, 0.2, 0.2}, eq, 1e-4) == doctest::Approx(0.2 + 1e-4 * 0.6));
  CHECK(aasf_score({0.2, 0.2, 0.2}, eq, 1e-4) < aasf_score({0.0, 0.0, 0.9}, eq, 1e-4));

  // Normalized points (0.2,0.2,0.2) and (0,0,0.9) once the other two members
  // pin the ideal at 0 and the nadir at 1.
  const std::vector<Individual> pair = {member(0.2, 0.2, 0.2), member(0.0, 0.0, 0.9),
                                        member(1.0, 1.0, 0.0), member(0.0, 0.1, 1.0)};
  CHECK(aasf_pick(pair, eq, 1e-4) == 0);

  CHECK_THROWS(aasf_pick(pair, Weights{1, 0, 1}, 1e-4));
  CHECK_THROWS(aasf_pick(std::vector<Individual>{}, eq, 1e-4));
}

TEST_CASE("AASF argmin is invariant under weight rescaling and objective affine maps")
{
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    auto front = random_front(rng, 30);
    const Weights w{rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)};
    const std::size_t base = aasf_pick(front, w, 1e-4);

    const double s = rng.uniform(0.1, 10.0);
    CHECK(aasf_pick(front, Weights{w[0] * s, w[1] * s, w[2] * s}, 1e-4) == base);

    const std::size_t m = rng.index(3);
    for (auto& x : front)
      x.fitness[m] = 3.7 * x.fitness[m] + 12.5;
    CHECK(aasf_pick(front, w, 1e-4) == base);
  }
}

TEST_CASE("a vanishing weight drives the pick to that objective's optimum")
{
  // Objective i enters the score as f_i / w_i, so w_i -> 0 makes it decisive.
  Rng rng(21);
  const double eps = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const auto front = random_front(rng, 25);
    const auto best = best_per_objective(front);
    const std::size_t path = aasf_pick(front, Weights{eps, 1.0, 1.0}, 1e-4);
    CHECK(front[path].fitness[0] == front[best.max_path].fitness[0]);
    const std::size_t vel = aasf_pick(front, Weights{1.0, eps, 1.0}, 1e-4);
    CHECK(front[vel].fitness[1] == front[best.min_velocity].fitness[1]);
    const std::size_t cost = aasf_pick(front, Weights{1.0, 1.0, eps}, 1e-4);
    CHECK(front[cost].fitness[2] == front[best.min_cost].fitness[2]);
  }
}

TEST_CASE("interval sampling")
{
  Rng rng(3);
  const auto front = random_front(rng, 200);
  const auto s = sample_interval(front, 10);
  CHECK(s.size() == 20);
  for (std::size_t i = 1; i < s.size(); ++i)
    CHECK(front[s[i - 1]].fitness[2] <= front[s[i]].fitness[2]);
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == s.size());

  const auto all = sample_interval(front, 1);
  CHECK(all.size() == 200);
  CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 200);

  const auto one = sample_interval(front, 500);
  REQUIRE(one.size() == 1);
  for (const auto& x : front)
    CHECK(front[one[0]].fitness[2] <= x.fitness[2]);

  CHECK(sample_interval(std::vector<Individual>{}, 3).empty());
  CHECK_THROWS(sample_interval(front, 0));
}
