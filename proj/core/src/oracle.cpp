#include "cphbl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cphbl/control.hpp"
#include "cphbl/errors.hpp"

namespace cphbl {

namespace {

void enumerate_from(std::size_t f, std::uint32_t members, std::int64_t room, double cost, double reward,
                    std::span<const std::int64_t> sizes, std::span<const double> means, double alpha,
                    std::vector<FeasibleSet>& out) {
  for (std::size_t g = f; g < sizes.size(); ++g) {
    if (sizes[g] > room) continue;
    const auto L = static_cast<double>(sizes[g]);
    const std::uint32_t with = members | (std::uint32_t{1} << g);
    const double c = cost + alpha * L;
    const double r = reward + L * means[g];
    out.push_back({with, c, r});
    enumerate_from(g + 1, with, room - sizes[g], c, r, sizes, means, alpha, out);
  }
}

std::vector<std::uint8_t> mask_to_row(std::uint32_t members, std::size_t num_files) {
  std::vector<std::uint8_t> row(num_files, 0);
  for (std::size_t f = 0; f < num_files; ++f) row[f] = (members >> f) & 1U;
  return row;
}

double cross(const HullPoint& o, const HullPoint& a, const HullPoint& b) {
  return (a.cost - o.cost) * (b.reward - o.reward) - (a.reward - o.reward) * (b.cost - o.cost);
}

/// Value at `target` of the envelope through `hull`, and the bracketing
/// vertices with the weight on the upper one.
struct Bracket {
  std::size_t lower = 0;
  std::size_t upper = 0;
  double upper_weight = 0.0;
  double value = 0.0;
};

Bracket locate(std::span<const HullPoint> hull, double target) {
  Bracket b;
  if (target <= hull.front().cost) {
    b.value = hull.front().reward;
    return b;
  }
  if (target >= hull.back().cost) {
    b.lower = b.upper = hull.size() - 1;
    b.value = hull.back().reward;
    return b;
  }
  std::size_t j = 1;
  while (hull[j].cost < target) ++j;
  if (hull[j].cost == target) {
    b.lower = b.upper = j;
    b.value = hull[j].reward;
    return b;
  }
  b.lower = j - 1;
  b.upper = j;
  const auto& lo = hull[j - 1];
  const auto& hi = hull[j];
  b.upper_weight = (target - lo.cost) / (hi.cost - lo.cost);
  b.value = lo.reward + b.upper_weight * (hi.reward - lo.reward);
  return b;
}

}  // namespace

std::vector<FeasibleSet> enumerate_feasible(std::span<const std::int64_t> sizes, std::span<const double> means,
                                            double alpha, std::int64_t capacity) {
  if (sizes.size() > kMaxEnumerationFiles) {
    throw OracleError("enumerate_feasible: " + std::to_string(sizes.size()) + " files exceed the enumeration limit of " +
                      std::to_string(kMaxEnumerationFiles) + "; use lagrangian_r_star");
  }
  std::vector<FeasibleSet> out;
  out.push_back({0U, 0.0, 0.0});
  enumerate_from(0, 0U, capacity, 0.0, 0.0, sizes, means, alpha, out);
  return out;
}

std::vector<HullPoint> upper_envelope(std::span<const HullPoint> points) {
  std::vector<HullPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const HullPoint& a, const HullPoint& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.source < b.source;
  });
  if (sorted.empty() || sorted.front().cost != 0.0) {
    throw std::invalid_argument("upper_envelope: requires a point with cost 0");
  }

  std::vector<HullPoint> hull;
  for (const auto& p : sorted) {
    if (!hull.empty() && hull.back().cost == p.cost) continue;  // keep the best reward per cost
    if (!hull.empty() && p.reward <= hull.back().reward) continue;  // never useful under a <= budget
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) >= 0.0) hull.pop_back();
    hull.push_back(p);
  }
  return hull;
}

double envelope_value(std::span<const HullPoint> hull, double cost) { return locate(hull, cost).value; }

Mixture optimal_mixture(std::span<const FeasibleSet> catalog, std::size_t num_files, double budget) {
  if (catalog.empty()) throw std::invalid_argument("optimal_mixture: empty catalog");
  std::vector<HullPoint> points;
  points.reserve(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) points.push_back({catalog[i].cost, catalog[i].reward, i});
  const auto hull = upper_envelope(points);
  const auto b = locate(hull, std::max(budget, 0.0));

  Mixture m;
  m.value = b.value;
  auto add = [&](const HullPoint& p, double prob) {
    const auto& s = catalog[p.source];
    m.support.push_back({mask_to_row(s.members, num_files), prob, s.cost, s.reward});
    m.expected_cost += prob * s.cost;
  };
  if (b.lower == b.upper) {
    add(hull[b.lower], 1.0);
  } else {
    add(hull[b.lower], 1.0 - b.upper_weight);
    add(hull[b.upper], b.upper_weight);
  }
  return m;
}

Mixture lagrangian_r_star(std::span<const std::int64_t> sizes, std::span<const double> means, double alpha,
                          std::int64_t capacity, double budget, double tolerance, int max_iterations) {
  const auto F = sizes.size();
  struct Vertex {
    double cost = 0.0;
    double reward = 0.0;
    std::vector<std::uint8_t> row;
  };

  PlacementSolver solver;
  std::vector<double> values(F);
  auto solve = [&](double lambda) {
    for (std::size_t f = 0; f < F; ++f) values[f] = static_cast<double>(sizes[f]) * (means[f] - lambda * alpha);
    Vertex v;
    v.row.assign(F, 0);
    solver.solve_values(values, sizes, capacity, v.row);
    for (std::size_t f = 0; f < F; ++f) {
      if (v.row[f] == 0) continue;
      v.cost += alpha * static_cast<double>(sizes[f]);
      v.reward += static_cast<double>(sizes[f]) * means[f];
    }
    return v;
  };
  auto single = [](Vertex v) {
    Mixture m;
    m.value = v.reward;
    m.expected_cost = v.cost;
    m.support.push_back({std::move(v.row), 1.0, v.cost, v.reward});
    return m;
  };

  const double target = std::max(budget, 0.0);
  Vertex lo = solve(0.0);
  if (lo.cost <= target) return single(std::move(lo));
  Vertex hi{0.0, 0.0, std::vector<std::uint8_t>(F, 0)};

  for (int iter = 0; iter < max_iterations; ++iter) {
    const double slope = (lo.reward - hi.reward) / (lo.cost - hi.cost);
    Vertex p = solve(slope);
    const double chord = hi.reward - slope * hi.cost;
    const double excess = (p.reward - slope * p.cost) - chord;
    if (excess <= tolerance) {
      const double w = (target - hi.cost) / (lo.cost - hi.cost);
      Mixture m;
      m.value = hi.reward + w * (lo.reward - hi.reward);
      m.expected_cost = (1.0 - w) * hi.cost + w * lo.cost;
      m.support.push_back({std::move(hi.row), 1.0 - w, hi.cost, hi.reward});
      m.support.push_back({std::move(lo.row), w, lo.cost, lo.reward});
      return m;
    }
    if (p.cost == target) return single(std::move(p));
    if (p.cost > target) {
      lo = std::move(p);
    } else {
      hi = std::move(p);
    }
  }
  std::ostringstream os;
  os << "lagrangian_r_star: no convergence after " << max_iterations << " iterations; bracket costs [" << hi.cost
     << ", " << lo.cost << "], rewards [" << hi.reward << ", " << lo.reward << "]";
  throw OracleError(os.str());
}

RStar r_star(const SystemConfig& cfg, const PopularityModel& model, bool force_lagrangian) {
  RStar out;
  const bool enumerate = !force_lagrangian && cfg.num_files() <= kMaxEnumerationFiles;
  for (std::size_t n = 0; n < cfg.num_efs; ++n) {
    Mixture m;
    if (enumerate) {
      const auto catalog =
          enumerate_feasible(cfg.file_sizes, model.mean_row(n), cfg.unit_storage_cost, cfg.efs_capacity[n]);
      m = optimal_mixture(catalog, cfg.num_files(), cfg.budget[n]);
    } else {
      m = lagrangian_r_star(cfg.file_sizes, model.mean_row(n), cfg.unit_storage_cost, cfg.efs_capacity[n],
                            cfg.budget[n]);
    }
    out.per_efs.push_back(m.value);
    out.total += m.value;
    out.mixtures.push_back(std::move(m));
  }
  return out;
}

}  // namespace cphbl
