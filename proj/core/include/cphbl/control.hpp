#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cphbl {

/// Q(t+1) = max(Q(t) - b, 0) + C(t).
double update_queue(double backlog, double budget, double cost) noexcept;

/// Caching gains of one EFS for one slot.
struct WeightRow {
  /// w~_f = L_f (V d~_f - alpha Q) for every file.
  std::vector<double> weights;
  /// Files with w~_f >= 0 in ascending index order; position i of this list
  /// is item i+1 of the knapsack.
  std::vector<std::size_t> admissible;
};

WeightRow compute_weights(std::span<const double> estimates, double backlog, std::span<const std::int64_t> sizes,
                          double v, double alpha);
void compute_weights(std::span<const double> estimates, double backlog, std::span<const std::int64_t> sizes,
                     double v, double alpha, WeightRow& out);

/// v(i, m): best total value using the first i items within capacity m.
class KnapsackTable {
 public:
  std::size_t items() const noexcept { return items_; }
  std::int64_t capacity() const noexcept { return capacity_; }
  double value(std::size_t i, std::int64_t m) const {
    return values_[i * static_cast<std::size_t>(capacity_ + 1) + static_cast<std::size_t>(m)];
  }
  double optimum() const { return value(items_, capacity_); }

 private:
  friend void knapsack_dp(std::span<const double>, std::span<const std::int64_t>, std::int64_t, KnapsackTable&);

  std::size_t items_ = 0;
  std::int64_t capacity_ = 0;
  std::vector<double> values_;
};

/// 0/1 knapsack by dynamic programming, O(items * capacity). Item values
/// must be finite and non-negative, sizes integers >= 1.
KnapsackTable knapsack_dp(std::span<const double> values, std::span<const std::int64_t> sizes,
                          std::int64_t capacity);
/// Same, reusing the storage of `table`.
void knapsack_dp(std::span<const double> values, std::span<const std::int64_t> sizes, std::int64_t capacity,
                 KnapsackTable& table);

/// Walks the table from (items, capacity) down to item 1, testing the
/// "include item i" branch before the "skip item i" branch. Returns the
/// selected item positions in ascending order. Throws std::logic_error if
/// the walk cannot reproduce the table optimum exactly.
std::vector<std::size_t> backtrack_placement(const KnapsackTable& table, std::span<const double> values,
                                             std::span<const std::int64_t> sizes);
void backtrack_placement(const KnapsackTable& table, std::span<const double> values,
                         std::span<const std::int64_t> sizes, std::vector<std::size_t>& selected);

struct EfsParams {
  std::span<const std::int64_t> sizes;
  std::int64_t capacity = 0;
  double v = 1.0;
  double alpha = 1.0;
};

/// Per-slot placement of one EFS: files with negative gain are never cached
/// and the rest solve the capacity-constrained knapsack exactly.
std::vector<std::uint8_t> set_cache_placement(std::span<const double> estimates, double backlog,
                                              const EfsParams& params);

/// Allocation-reusing solver for the simulation loop. Not thread-safe; use
/// one instance per EFS or per thread.
class PlacementSolver {
 public:
  /// Drift-plus-penalty placement (weights from estimates and backlog).
  void solve(std::span<const double> estimates, double backlog, const EfsParams& params,
             std::span<std::uint8_t> row);

  /// Knapsack over arbitrary item values; negative-valued files are
  /// excluded up front.
  void solve_values(std::span<const double> values, std::span<const std::int64_t> sizes, std::int64_t capacity,
                    std::span<std::uint8_t> row);

  const WeightRow& weights() const noexcept { return weights_; }

 private:
  WeightRow weights_;
  std::vector<double> item_values_;
  std::vector<std::int64_t> item_sizes_;
  std::vector<std::size_t> item_files_;
  std::vector<std::size_t> selected_;
  KnapsackTable table_;
};

}  // namespace cphbl
