#include "cphbl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cphbl {

ArmTable::ArmTable(std::size_t num_efs, std::size_t num_files, std::vector<std::size_t> users_per_efs)
    : num_efs_(num_efs), num_files_(num_files), users_(std::move(users_per_efs)), stats_(num_efs * num_files) {
  if (users_.size() != num_efs_) throw std::invalid_argument("ArmTable: one user count per EFS");
}

ArmTable init_stats(const HistorySet& history, std::vector<std::size_t> users_per_efs) {
  ArmTable table(history.num_efs, history.num_files, std::move(users_per_efs));
  for (std::size_t n = 0; n < history.num_efs; ++n) {
    for (std::size_t f = 0; f < history.num_files; ++f) {
      auto& s = table.at(n, f);
      s.hist_count = history.count(n, f);
      s.hist_sum = history.sum(n, f);
      s.hist_sum_sq = history.sum_square(n, f);
    }
  }
  return table;
}

double hucb1_radius(std::uint64_t observations, std::uint64_t t, double max_demand) {
  return max_demand * std::sqrt(3.0 * std::log(static_cast<double>(t)) / (2.0 * static_cast<double>(observations)));
}

double hucb1_estimate(const ArmStats& stats, std::uint64_t t, double max_demand) {
  const auto count = stats.total_count();
  if (count == 0 || t == 0) throw std::logic_error("hucb1_estimate: requires h + H > 0 and t > 0");
  const double mean = static_cast<double>(stats.total_sum()) / static_cast<double>(count);
  return std::min(mean + hucb1_radius(count, t, max_demand), max_demand);
}

double ucbt_estimate(const ArmStats& stats, std::uint64_t t, double max_demand) {
  const auto count = stats.total_count();
  if (count == 0 || t == 0) throw std::logic_error("ucbt_estimate: requires h + H > 0 and t > 0");
  const double n = static_cast<double>(count);
  const double log_t = std::log(static_cast<double>(t));
  const double mean = static_cast<double>(stats.total_sum()) / n;
  const double scaled_mean = mean / max_demand;
  const double scaled_second = static_cast<double>(stats.total_sum_sq()) / (n * max_demand * max_demand);
  const double variance_bound = scaled_second - scaled_mean * scaled_mean + std::sqrt(2.0 * log_t / n);
  const double radius = max_demand * std::sqrt(log_t / n * std::min(0.25, variance_bound));
  return std::min(mean + radius, max_demand);
}

double popularity_estimate(const ArmStats& stats, std::uint64_t t, double max_demand, Estimator estimator) {
  if (max_demand <= 0.0) return 0.0;  // EFS without users
  if (estimator == Estimator::greedy) {
    if (auto m = stats.mean()) return *m;
    return max_demand;
  }
  if (t == 0 || stats.total_count() == 0) return max_demand;
  return estimator == Estimator::ucbt ? ucbt_estimate(stats, t, max_demand) : hucb1_estimate(stats, t, max_demand);
}

void update_stats(ArmStats& stats, std::uint32_t demand, bool cached) noexcept {
  if (!cached) return;
  const auto d = static_cast<std::uint64_t>(demand);
  ++stats.online_count;
  stats.online_sum += d;
  stats.online_sum_sq += d * d;
}

}  // namespace cphbl
