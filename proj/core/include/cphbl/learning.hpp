#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cphbl/config.hpp"
#include "cphbl/demand.hpp"

namespace cphbl {

/// Observation statistics of one (EFS, file) arm. Sums are exact integers;
/// means are formed on demand.
struct ArmStats {
  std::uint64_t online_count = 0;
  std::uint64_t hist_count = 0;
  std::uint64_t online_sum = 0;
  std::uint64_t hist_sum = 0;
  std::uint64_t online_sum_sq = 0;
  std::uint64_t hist_sum_sq = 0;

  std::uint64_t total_count() const noexcept { return online_count + hist_count; }
  std::uint64_t total_sum() const noexcept { return online_sum + hist_sum; }
  std::uint64_t total_sum_sq() const noexcept { return online_sum_sq + hist_sum_sq; }

  /// Empirical mean over online and offline observations; empty when no
  /// observation exists.
  std::optional<double> mean() const noexcept {
    if (total_count() == 0) return std::nullopt;
    return static_cast<double>(total_sum()) / static_cast<double>(total_count());
  }

  bool operator==(const ArmStats&) const = default;
};

/// N x F table of arm statistics with the per-EFS user counts K_n.
class ArmTable {
 public:
  ArmTable(std::size_t num_efs, std::size_t num_files, std::vector<std::size_t> users_per_efs);

  std::size_t num_efs() const noexcept { return num_efs_; }
  std::size_t num_files() const noexcept { return num_files_; }
  double users(std::size_t efs) const { return static_cast<double>(users_.at(efs)); }

  ArmStats& at(std::size_t efs, std::size_t file) { return stats_[efs * num_files_ + file]; }
  const ArmStats& at(std::size_t efs, std::size_t file) const { return stats_[efs * num_files_ + file]; }

  /// Estimate d~_{n,f}(0) = K_n used for every arm before any update.
  double initial_estimate(std::size_t efs) const { return users(efs); }

 private:
  std::size_t num_efs_;
  std::size_t num_files_;
  std::vector<std::size_t> users_;
  std::vector<ArmStats> stats_;
};

/// Online counters start at zero; offline counters are taken from `history`.
ArmTable init_stats(const HistorySet& history, std::vector<std::size_t> users_per_efs);

/// K * sqrt(3 ln t / (2 (h + H))).
double hucb1_radius(std::uint64_t observations, std::uint64_t t, double max_demand);

/// min{ d_bar + K sqrt(3 ln t / (2 (h+H))), K }.
/// Requires h + H > 0 and t >= 1; callers outside that range use K instead
/// (see popularity_estimate).
double hucb1_estimate(const ArmStats& stats, std::uint64_t t, double max_demand);

/// UCB1-tuned on demands rescaled to [0, 1] by K:
///   V~ = E[(D/K)^2] - (d_bar/K)^2 + sqrt(2 ln t / (h+H))
///   d~ = min{ d_bar + K sqrt((ln t / (h+H)) min(1/4, V~)), K }
/// Historical squares enter the second moment like online ones.
/// Same preconditions as hucb1_estimate.
double ucbt_estimate(const ArmStats& stats, std::uint64_t t, double max_demand);

/// Guarded estimate used by the policies: K when t == 0 or the arm has no
/// observation, otherwise the estimator's value. Estimator::greedy returns
/// the plain empirical mean (K for an unobserved arm).
double popularity_estimate(const ArmStats& stats, std::uint64_t t, double max_demand, Estimator estimator);

/// Folds one slot into the arm: only a cached file (cached == true) is
/// observed.
void update_stats(ArmStats& stats, std::uint32_t demand, bool cached) noexcept;

}  // namespace cphbl
