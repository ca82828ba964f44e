#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cphbl/config.hpp"
#include "cphbl/demand.hpp"

namespace cphbl {

/// Largest catalog the enumeration path accepts.
inline constexpr std::size_t kMaxEnumerationFiles = 22;

/// A capacity-feasible file set with its expected reward sum L_f d_f and
/// cost alpha sum L_f. `members` bit f is file f.
struct FeasibleSet {
  std::uint32_t members = 0;
  double cost = 0.0;
  double reward = 0.0;
};

/// Every subset S with sum_{f in S} L_f <= capacity, empty set first.
/// Throws OracleError when the catalog exceeds kMaxEnumerationFiles.
std::vector<FeasibleSet> enumerate_feasible(std::span<const std::int64_t> sizes, std::span<const double> means,
                                            double alpha, std::int64_t capacity);

struct HullPoint {
  double cost = 0.0;
  double reward = 0.0;
  std::size_t source = 0;  // index of the generating point
};

/// Upper concave envelope of the points, truncated at the highest reward
/// so that it is non-decreasing: cost strictly increasing, slopes strictly
/// decreasing. The input must contain a point with cost 0.
std::vector<HullPoint> upper_envelope(std::span<const HullPoint> points);

/// Envelope value at `cost`, clamped to the envelope's cost range.
double envelope_value(std::span<const HullPoint> hull, double cost);

struct MixtureComponent {
  std::vector<std::uint8_t> row;
  double probability = 0.0;
  double cost = 0.0;
  double reward = 0.0;
};

/// Stationary randomized placement with at most two support points.
struct Mixture {
  double value = 0.0;          // expected reward per slot
  double expected_cost = 0.0;
  std::vector<MixtureComponent> support;
};

/// Best randomized mixture of catalog sets whose expected cost stays within
/// `budget`: the envelope evaluated at min(budget, largest useful cost).
Mixture optimal_mixture(std::span<const FeasibleSet> catalog, std::size_t num_files, double budget);

/// Same optimum without enumeration: hull vertices are generated by
/// knapsacks on the Lagrangian values L_f (d_f - lambda alpha), and the
/// bracket [lambda_lo, lambda_hi] around the budget is split at the chord
/// slope of its two vertices until no point lies more than `tolerance`
/// above the chord. Throws OracleError after `max_iterations`.
Mixture lagrangian_r_star(std::span<const std::int64_t> sizes, std::span<const double> means, double alpha,
                          std::int64_t capacity, double budget, double tolerance = 1e-9,
                          int max_iterations = 200);

struct RStar {
  double total = 0.0;
  std::vector<double> per_efs;
  std::vector<Mixture> mixtures;
};

/// Sum over EFSs of the per-EFS optimum under the true means. Uses
/// enumeration up to kMaxEnumerationFiles files, the Lagrangian path
/// otherwise (or always, when `force_lagrangian`).
RStar r_star(const SystemConfig& cfg, const PopularityModel& model, bool force_lagrangian = false);

}  // namespace cphbl
