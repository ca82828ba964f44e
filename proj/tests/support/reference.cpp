#include "reference.hpp"

#include <algorithm>

namespace cphbl::testing {

BruteForceResult brute_force_knapsack(std::span<const double> values, std::span<const std::int64_t> sizes,
                                      std::int64_t capacity) {
  BruteForceResult out;
  const auto F = sizes.size();
  for (std::uint32_t mask = 0; mask < (1U << F); ++mask) {
    std::int64_t used = 0;
    double value = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      if ((mask >> f) & 1U) {
        used += sizes[f];
        value += values[f];
      }
    }
    if (used > capacity) continue;
    if (mask == 0 || value > out.best) {
      out.best = value;
      out.best_mask = mask;
      out.optima = 1;
    } else if (value == out.best) {
      ++out.optima;
    }
  }
  return out;
}

std::size_t count_feasible_subsets(std::span<const std::int64_t> sizes, std::int64_t capacity) {
  std::size_t count = 0;
  for (std::uint32_t mask = 0; mask < (1U << sizes.size()); ++mask) {
    std::int64_t used = 0;
    for (std::size_t f = 0; f < sizes.size(); ++f) {
      if ((mask >> f) & 1U) used += sizes[f];
    }
    if (used <= capacity) ++count;
  }
  return count;
}

double pairwise_lp_optimum(std::span<const std::int64_t> sizes, std::span<const double> means, double alpha,
                           std::int64_t capacity, double budget) {
  std::vector<double> cost;
  std::vector<double> reward;
  for (std::uint32_t mask = 0; mask < (1U << sizes.size()); ++mask) {
    std::int64_t used = 0;
    double r = 0.0;
    for (std::size_t f = 0; f < sizes.size(); ++f) {
      if ((mask >> f) & 1U) {
        used += sizes[f];
        r += static_cast<double>(sizes[f]) * means[f];
      }
    }
    if (used > capacity) continue;
    cost.push_back(alpha * static_cast<double>(used));
    reward.push_back(r);
  }

  double best = 0.0;
  for (std::size_t i = 0; i < cost.size(); ++i) {
    if (cost[i] <= budget) best = std::max(best, reward[i]);
  }
  // A cheap set i and an expensive set j mixed so the budget binds exactly.
  for (std::size_t i = 0; i < cost.size(); ++i) {
    if (cost[i] > budget) continue;
    for (std::size_t j = 0; j < cost.size(); ++j) {
      if (cost[j] <= budget) continue;
      const double p = (budget - cost[i]) / (cost[j] - cost[i]);
      best = std::max(best, (1.0 - p) * reward[i] + p * reward[j]);
    }
  }
  return best;
}

KnapsackInstance random_knapsack_instance(RngStream& rng, std::size_t max_files) {
  KnapsackInstance in;
  const auto F = 1 + rng.uniform_index(max_files);
  for (std::size_t f = 0; f < F; ++f) {
    in.sizes.push_back(1 + static_cast<std::int64_t>(rng.uniform_index(8)));
    in.values.push_back(static_cast<double>(rng.uniform_index(64 * 50)) / 64.0);
  }
  in.capacity = static_cast<std::int64_t>(rng.uniform_index(31));
  return in;
}

SystemConfig small_config(std::size_t efs, std::size_t users_per_efs, std::size_t files, std::int64_t capacity,
                          double budget, std::uint64_t horizon, std::uint64_t history) {
  SystemConfig cfg;
  cfg.num_efs = efs;
  cfg.num_users = efs * users_per_efs;
  cfg.efs_users.assign(efs, {});
  for (std::size_t k = 0; k < cfg.num_users; ++k) cfg.efs_users[k % efs].push_back(k);
  const std::int64_t cycle[] = {1, 2, 4, 8};
  for (std::size_t f = 0; f < files; ++f) cfg.file_sizes.push_back(cycle[f % 4]);
  cfg.efs_capacity.assign(efs, capacity);
  cfg.unit_storage_cost = 1.0;
  cfg.budget.assign(efs, budget);
  cfg.v_param = 20.0;
  cfg.horizon = horizon;
  cfg.history_counts.assign(efs, std::vector<std::uint64_t>(files, history));
  for (std::size_t k = 0; k < cfg.num_users; ++k) cfg.zipf_skew.push_back(0.6 + 0.05 * static_cast<double>(k % 8));
  return validate_config(std::move(cfg));
}

}  // namespace cphbl::testing
