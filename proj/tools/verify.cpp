#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "cphbl/control.hpp"
#include "cphbl/oracle.hpp"
#include "cphbl/rng.hpp"

namespace cphbl::tools {

namespace {

struct Instance {
  std::vector<std::int64_t> sizes;
  std::vector<double> values;
  std::int64_t capacity = 0;
};

// Weights are multiples of 1/64 so every subset sum is exact in binary.
Instance random_instance(RngStream& rng) {
  Instance in;
  const auto F = 1 + rng.uniform_index(12);
  for (std::size_t f = 0; f < F; ++f) {
    in.sizes.push_back(1 + static_cast<std::int64_t>(rng.uniform_index(8)));
    in.values.push_back(static_cast<double>(rng.uniform_index(64 * 40)) / 64.0);
  }
  in.capacity = static_cast<std::int64_t>(rng.uniform_index(31));
  return in;
}

double brute_force(const Instance& in) {
  double best = 0.0;
  const auto F = in.sizes.size();
  for (std::uint32_t mask = 0; mask < (1U << F); ++mask) {
    std::int64_t used = 0;
    double value = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      if ((mask >> f) & 1U) {
        used += in.sizes[f];
        value += in.values[f];
      }
    }
    if (used <= in.capacity) best = std::max(best, value);
  }
  return best;
}

}  // namespace

std::size_t run_verify(const VerifyOptions& options, std::ostream& out) {
  std::size_t failures = 0;

  RngStream rng(options.seed);
  std::size_t knapsack_bad = 0;
  PlacementSolver solver;
  for (std::size_t i = 0; i < options.knapsack_instances; ++i) {
    const auto in = random_instance(rng);
    std::vector<std::uint8_t> row(in.sizes.size(), 0);
    solver.solve_values(in.values, in.sizes, in.capacity, row);
    double got = 0.0;
    std::int64_t used = 0;
    for (std::size_t f = 0; f < row.size(); ++f) {
      if (row[f] != 0) {
        got += in.values[f];
        used += in.sizes[f];
      }
    }
    if (got != brute_force(in) || used > in.capacity) ++knapsack_bad;
  }
  out << "knapsack: " << options.knapsack_instances - knapsack_bad << "/" << options.knapsack_instances
      << " instances match exhaustive search\n";
  failures += knapsack_bad;

  std::size_t oracle_bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < options.oracle_instances; ++i) {
    const auto F = 1 + rng.uniform_index(12);
    std::vector<std::int64_t> sizes;
    std::vector<double> means;
    for (std::size_t f = 0; f < F; ++f) {
      sizes.push_back(1 + static_cast<std::int64_t>(rng.uniform_index(8)));
      means.push_back(5.0 * rng.uniform01());
    }
    const auto capacity = static_cast<std::int64_t>(1 + rng.uniform_index(30));
    const double alpha = 0.5 + rng.uniform01();
    const double budget = alpha * static_cast<double>(capacity) * 1.2 * rng.uniform01();

    const auto exact = optimal_mixture(enumerate_feasible(sizes, means, alpha, capacity), F, budget).value;
    const auto approx = lagrangian_r_star(sizes, means, alpha, capacity, budget).value;
    const double err = std::abs(exact - approx);
    worst = std::max(worst, err);
    if (!(err <= options.oracle_tolerance)) ++oracle_bad;
  }
  out << "oracle: " << options.oracle_instances - oracle_bad << "/" << options.oracle_instances
      << " instances agree within " << options.oracle_tolerance << " (max |diff| " << worst << ")\n";
  failures += oracle_bad;
  return failures;
}

}  // namespace cphbl::tools
