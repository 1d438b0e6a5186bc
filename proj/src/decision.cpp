#include "terramod/decision.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace terramod {

NormalizedFront normalize(std::span<const Fitness> front)
{
  NormalizedFront out;
  if (front.empty())
    return out;
  out.ideal = out.nadir = front.front();
  for (const auto& f : front)
    for (std::size_t m = 0; m < f.size(); ++m) {
      out.ideal[m] = std::min(out.ideal[m], f[m]);
      out.nadir[m] = std::max(out.nadir[m], f[m]);
    }
  out.points.reserve(front.size());
  for (const auto& f : front) {
    Fitness p{};
    for (std::size_t m = 0; m < f.size(); ++m) {
      const double range = out.nadir[m] - out.ideal[m];
      p[m] = range > 0.0 ? (f[m] - out.ideal[m]) / range : 0.0;
    }
    out.points.push_back(p);
  }
  return out;
}

NormalizedFront normalize(std::span<const Individual> members)
{
  std::vector<Fitness> f;
  f.reserve(members.size());
  for (const auto& m : members)
    f.push_back(m.fitness);
  return normalize(std::span<const Fitness>(f));
}

ObjectivePicks best_per_objective(std::span<const Individual> members)
{
  if (members.empty())
    throw std::invalid_argument("empty archive");
  std::array<std::size_t, 3> best{0, 0, 0};
  for (std::size_t i = 1; i < members.size(); ++i)
    for (std::size_t m = 0; m < 3; ++m) {
      const Fitness& cur = members[i].fitness;
      const Fitness& inc = members[best[m]].fitness;
      if (cur[m] < inc[m] || (cur[m] == inc[m] && cur[2] < inc[2]))
        best[m] = i;
    }
  return {best[0], best[1], best[2]};
}

double aasf_score(const Fitness& normalized, const Weights& w, double rho)
{
  double worst = 0.0;
  double sum = 0.0;
  for (std::size_t m = 0; m < normalized.size(); ++m) {
    const double term = normalized[m] / w[m];
    worst = m == 0 ? term : std::max(worst, term);
    sum += term;
  }
  return worst + rho * sum;
}

std::size_t aasf_pick(std::span<const Individual> members, const Weights& w, double rho)
{
  if (members.empty())
    throw std::invalid_argument("empty archive");
  for (const double x : w)
    if (!(x > 0.0))
      throw std::invalid_argument("AASF weights must be > 0");
  if (!(rho > 0.0))
    throw std::invalid_argument("AASF rho must be > 0");

  const NormalizedFront nf = normalize(members);
  std::size_t best = 0;
  double best_score = aasf_score(nf.points[0], w, rho);
  for (std::size_t i = 1; i < nf.points.size(); ++i) {
    const double s = aasf_score(nf.points[i], w, rho);
    if (s < best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> sample_interval(std::span<const Individual> members, std::size_t k)
{
  if (k == 0)
    throw std::invalid_argument("sampling interval must be >= 1");
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return members[a].fitness[2] < members[b].fitness[2];
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < order.size(); i += k)
    out.push_back(order[i]);
  return out;
}

} // namespace terramod
