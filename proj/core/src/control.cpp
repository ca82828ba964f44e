#include "cphbl/control.hpp"

#include <algorithm>
#include <stdexcept>

namespace cphbl {

double update_queue(double backlog, double budget, double cost) noexcept {
  return std::max(backlog - budget, 0.0) + cost;
}

WeightRow compute_weights(std::span<const double> estimates, double backlog, std::span<const std::int64_t> sizes,
                          double v, double alpha) {
  WeightRow out;
  compute_weights(estimates, backlog, sizes, v, alpha, out);
  return out;
}

void compute_weights(std::span<const double> estimates, double backlog, std::span<const std::int64_t> sizes,
                     double v, double alpha, WeightRow& out) {
  const auto F = sizes.size();
  out.weights.resize(F);
  out.admissible.clear();
  const double penalty = alpha * backlog;
  for (std::size_t f = 0; f < F; ++f) {
    out.weights[f] = static_cast<double>(sizes[f]) * (v * estimates[f] - penalty);
    if (out.weights[f] >= 0.0) out.admissible.push_back(f);
  }
}

KnapsackTable knapsack_dp(std::span<const double> values, std::span<const std::int64_t> sizes,
                          std::int64_t capacity) {
  KnapsackTable table;
  knapsack_dp(values, sizes, capacity, table);
  return table;
}

void knapsack_dp(std::span<const double> values, std::span<const std::int64_t> sizes, std::int64_t capacity,
                 KnapsackTable& table) {
  if (values.size() != sizes.size()) throw std::invalid_argument("knapsack_dp: values and sizes differ in length");
  if (capacity < 0) throw std::invalid_argument("knapsack_dp: negative capacity");
  const std::size_t items = values.size();
  const auto width = static_cast<std::size_t>(capacity + 1);
  table.items_ = items;
  table.capacity_ = capacity;
  table.values_.assign((items + 1) * width, 0.0);

  auto& v = table.values_;
  for (std::size_t i = 1; i <= items; ++i) {
    const auto size = sizes[i - 1];
    const double gain = values[i - 1];
    const double* prev = v.data() + (i - 1) * width;
    double* cur = v.data() + i * width;
    for (std::int64_t m = 0; m <= capacity; ++m) {
      const auto mm = static_cast<std::size_t>(m);
      if (size > m) {
        cur[mm] = prev[mm];
      } else {
        cur[mm] = std::max(prev[mm], prev[static_cast<std::size_t>(m - size)] + gain);
      }
    }
  }
}

std::vector<std::size_t> backtrack_placement(const KnapsackTable& table, std::span<const double> values,
                                             std::span<const std::int64_t> sizes) {
  std::vector<std::size_t> selected;
  backtrack_placement(table, values, sizes, selected);
  return selected;
}

void backtrack_placement(const KnapsackTable& table, std::span<const double> values,
                         std::span<const std::int64_t> sizes, std::vector<std::size_t>& selected) {
  selected.clear();
  std::int64_t m = table.capacity();
  for (std::size_t i = table.items(); i >= 1; --i) {
    const auto size = sizes[i - 1];
    const double here = table.value(i, m);
    if (m - size >= 0 && here == table.value(i - 1, m - size) + values[i - 1]) {
      selected.push_back(i - 1);
      m -= size;
    } else if (here != table.value(i - 1, m)) {
      throw std::logic_error("backtrack_placement: table inconsistent at item " + std::to_string(i));
    }
  }
  std::reverse(selected.begin(), selected.end());

  // Both branches above are exact equalities, so summing the chosen values
  // bottom-up replays the table's own additions.
  double total = 0.0;
  for (auto i : selected) total += values[i];
  if (total != table.optimum()) {
    throw std::logic_error("backtrack_placement: reconstructed value differs from the table optimum");
  }
}

std::vector<std::uint8_t> set_cache_placement(std::span<const double> estimates, double backlog,
                                              const EfsParams& params) {
  std::vector<std::uint8_t> row(params.sizes.size(), 0);
  PlacementSolver solver;
  solver.solve(estimates, backlog, params, row);
  return row;
}

void PlacementSolver::solve(std::span<const double> estimates, double backlog, const EfsParams& params,
                            std::span<std::uint8_t> row) {
  compute_weights(estimates, backlog, params.sizes, params.v, params.alpha, weights_);
  solve_values(weights_.weights, params.sizes, params.capacity, row);
}

void PlacementSolver::solve_values(std::span<const double> values, std::span<const std::int64_t> sizes,
                                   std::int64_t capacity, std::span<std::uint8_t> row) {
  item_values_.clear();
  item_sizes_.clear();
  item_files_.clear();
  for (std::size_t f = 0; f < values.size(); ++f) {
    row[f] = 0;
    if (values[f] >= 0.0) {
      item_values_.push_back(values[f]);
      item_sizes_.push_back(sizes[f]);
      item_files_.push_back(f);
    }
  }
  knapsack_dp(item_values_, item_sizes_, capacity, table_);
  backtrack_placement(table_, item_values_, item_sizes_, selected_);
  for (auto i : selected_) row[item_files_[i]] = 1;
}

}  // namespace cphbl
