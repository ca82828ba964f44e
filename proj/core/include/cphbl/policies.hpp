#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cphbl/config.hpp"
#include "cphbl/control.hpp"
#include "cphbl/demand.hpp"
#include "cphbl/learning.hpp"
#include "cphbl/oracle.hpp"
#include "cphbl/placement.hpp"
#include "cphbl/rng.hpp"

namespace cphbl {

/// Static per-run parameters every policy needs.
struct PolicyContext {
  std::size_t num_efs = 0;
  std::size_t num_files = 0;
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> capacity;
  std::vector<double> budget;
  std::vector<std::vector<std::size_t>> efs_users;
  double alpha = 1.0;
  double v = 1.0;

  static PolicyContext from_config(const SystemConfig& cfg);

  double users(std::size_t efs) const { return static_cast<double>(efs_users[efs].size()); }
  EfsParams efs_params(std::size_t efs) const { return EfsParams{sizes, capacity[efs], v, alpha}; }
};

/// What one slot earned and cost, per EFS.
struct SlotOutcome {
  std::vector<double> reward;  // R_n(t) = sum_f L_f D_{n,f}(t) X_{n,f}(t)
  std::vector<double> cost;    // C_n(t) = alpha sum_f L_f X_{n,f}(t)
};

/// Per-slot decision interface. The driver calls decide(t) before the
/// slot's demand is drawn and observe(t, D) after; decide never sees D(t).
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;

  /// Placement in force at the start of slot t.
  virtual const Placement& decide(std::uint64_t t) = 0;

  /// Reveals the slot's demand, updates internal state and reports the
  /// slot's reward and cost.
  virtual void observe(std::uint64_t t, const DemandMatrix& demand, SlotOutcome& out) = 0;

  /// Virtual-queue backlogs Q_n(t+1) after the last observe; empty for
  /// policies without queues.
  virtual std::span<const double> queues() const { return {}; }
};

/// CPHBL with a pluggable estimator (HUCB1, UCB1-tuned, or epsilon-greedy
/// on empirical means).
class CphblPolicy final : public Policy {
 public:
  CphblPolicy(PolicyContext ctx, ArmTable stats, Estimator estimator, double epsilon, RngStream rng);

  std::string name() const override;
  const Placement& decide(std::uint64_t t) override;
  void observe(std::uint64_t t, const DemandMatrix& demand, SlotOutcome& out) override;
  std::span<const double> queues() const override { return queues_; }

  const ArmTable& stats() const noexcept { return stats_; }
  /// Estimates d~_{n,f}(t) used by the last decide().
  std::span<const double> estimates() const noexcept { return estimates_; }
  /// Number of EFS-slots that took the uniform-exploration branch.
  std::uint64_t explorations() const noexcept { return explorations_; }

 private:
  PolicyContext ctx_;
  ArmTable stats_;
  Estimator estimator_;
  double epsilon_;
  RngStream rng_;
  std::vector<double> queues_;
  std::vector<double> estimates_;
  Placement placement_;
  PlacementSolver solver_;
  WeightRow scratch_weights_;
  std::vector<std::size_t> scratch_;
  std::uint64_t explorations_ = 0;
};

/// Combinatorial UCB without history, budgets or queues: HUCB1-form
/// estimates from online observations, then a capacity-only knapsack on
/// sum L_f d~_f X_f.
class McucbPolicy final : public Policy {
 public:
  explicit McucbPolicy(PolicyContext ctx);

  std::string name() const override { return "mcucb"; }
  const Placement& decide(std::uint64_t t) override;
  void observe(std::uint64_t t, const DemandMatrix& demand, SlotOutcome& out) override;

 private:
  PolicyContext ctx_;
  ArmTable stats_;
  std::vector<double> values_;
  Placement placement_;
  PlacementSolver solver_;
};

/// Reactive LFU/LRU cache. Requests are processed one by one in ascending
/// user order; a miss evicts lowest-priority residents until the file fits
/// (files larger than the whole cache are never admitted). Cost is charged
/// on the end-of-slot resident set.
class ReactivePolicy final : public Policy {
 public:
  enum class Rule { lfu, lru };

  ReactivePolicy(PolicyContext ctx, Rule rule);

  std::string name() const override { return rule_ == Rule::lfu ? "lfu" : "lru"; }
  const Placement& decide(std::uint64_t t) override;
  void observe(std::uint64_t t, const DemandMatrix& demand, SlotOutcome& out) override;

  /// End-of-slot resident set.
  const Placement& resident() const noexcept { return resident_; }
  /// LFU request count or LRU recency stamp of a resident file.
  std::uint64_t priority(std::size_t efs, std::size_t file) const { return meta_[efs * ctx_.num_files + file]; }

  /// Handles a single request; returns true on a hit. Exposed for tests.
  bool request(std::size_t efs, std::size_t file, std::uint64_t stamp);

 private:
  PolicyContext ctx_;
  Rule rule_;
  Placement resident_;
  Placement start_of_slot_;
  std::vector<std::uint64_t> meta_;
  std::vector<std::int64_t> used_;
};

/// Caches nothing. Regret equals R*.
class NoopPolicy final : public Policy {
 public:
  explicit NoopPolicy(PolicyContext ctx);

  std::string name() const override { return "noop"; }
  const Placement& decide(std::uint64_t) override { return placement_; }
  void observe(std::uint64_t t, const DemandMatrix& demand, SlotOutcome& out) override;

 private:
  PolicyContext ctx_;
  Placement placement_;
};

/// Omniscient stationary policy: each slot, every EFS independently draws a
/// placement from its optimal two-point mixture.
class MixturePolicy final : public Policy {
 public:
  MixturePolicy(PolicyContext ctx, std::vector<Mixture> mixtures, RngStream rng);

  std::string name() const override { return "oracle"; }
  const Placement& decide(std::uint64_t t) override;
  void observe(std::uint64_t t, const DemandMatrix& demand, SlotOutcome& out) override;

 private:
  PolicyContext ctx_;
  std::vector<Mixture> mixtures_;
  RngStream rng_;
  Placement placement_;
};

/// Result of one epsilon-greedy placement.
struct GreedySelection {
  std::vector<std::uint8_t> row;
  bool explored = false;
};

/// With probability epsilon, fills the cache by drawing still-fitting files
/// uniformly without replacement from the non-negative-gain set built from
/// the means; otherwise solves the knapsack on the mean-based gains. Draws
/// the coin (and any exploration picks) from `rng`.
GreedySelection epsilon_greedy_select(std::span<const double> means, double backlog, const EfsParams& params,
                                      double epsilon, RngStream& rng);

/// sum_f L_f D_f X_f and alpha sum_f L_f X_f for one EFS row.
double slot_reward(std::span<const std::uint8_t> row, std::span<const std::uint32_t> demand_row,
                   std::span<const std::int64_t> sizes);
double slot_cost(std::span<const std::uint8_t> row, std::span<const std::int64_t> sizes, double alpha);

/// Builds the policy selected by cfg.policy. `mixtures` is only read for
/// PolicyKind::oracle.
std::unique_ptr<Policy> make_policy(const SystemConfig& cfg, const HistorySet& history,
                                    const std::vector<Mixture>& mixtures);

}  // namespace cphbl
