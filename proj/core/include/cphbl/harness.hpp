#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cphbl/config.hpp"
#include "cphbl/demand.hpp"
#include "cphbl/oracle.hpp"

namespace cphbl {

inline constexpr int kCsvSchemaVersion = 1;

/// Constants of the queue and regret bounds for a configuration.
struct BoundReport {
  double B = 0.0;            // sum_n (b_n^2 + alpha^2 M_n^2) / 2
  double Gamma = 0.0;        // 2 sum_n K_n sqrt(6 M_n sum_f L_f)
  double sum_users_capacity = 0.0;  // sum_n K_n M_n

  /// B/V + 4 sum_n K_n M_n / T + Gamma sqrt(ln T / (T + H_min)).
  double bound(std::uint64_t horizon, double v, std::uint64_t h_min) const;
  /// Numerator of the time-averaged queue bound: B + V sum_n 2 K_n M_n.
  double queue_numerator(double v) const { return B + v * 2.0 * sum_users_capacity; }
};

BoundReport theoretical_bounds(const SystemConfig& cfg);

struct RunOptions {
  /// A checkpoint is recorded every `checkpoint_stride` slots and at T.
  /// A stride of 1 keeps the full per-slot series.
  std::uint64_t checkpoint_stride = 1000;
  /// Replaces the demand generator when set.
  const DemandTrace* replay = nullptr;
  /// Receives every slot's demand when set.
  DemandTrace* record_trace = nullptr;
  /// Reuses a precomputed optimum (it depends only on the true means and
  /// budgets, not on V, T, history or seeds).
  const RStar* r_star = nullptr;
};

/// Cumulative quantities over slots 0..slot-1.
struct Checkpoint {
  std::uint64_t slot = 0;
  double reward = 0.0;           // sum of realized R_n
  double expected_reward = 0.0;  // sum of L_f d_{n,f} X_{n,f}
  std::vector<double> cost;      // per EFS sum of C_n
  std::vector<double> queue;     // Q_n(slot)
  double queue_total = 0.0;      // sum over tau < slot of sum_n Q_n(tau)

  double reward_avg() const { return reward / static_cast<double>(slot); }
  double expected_reward_avg() const { return expected_reward / static_cast<double>(slot); }
  double cost_avg(std::size_t efs) const { return cost[efs] / static_cast<double>(slot); }
  double total_cost_avg() const;
  double queue_avg_total() const { return queue_total / static_cast<double>(slot); }
};

struct RunRecord {
  std::uint64_t config_hash = 0;
  Seeds seeds;
  std::string policy;
  std::size_t num_efs = 0;
  std::uint64_t horizon = 0;
  double v = 0.0;
  std::uint64_t h_min = 0;
  std::vector<double> budget;
  RStar r_star;
  BoundReport bounds;
  std::vector<Checkpoint> checkpoints;
  double wall_seconds = 0.0;

  const Checkpoint& terminal() const { return checkpoints.back(); }
};

/// Runs T slots of decide -> draw demand -> observe. Deterministic in the
/// config's seeds. Throws InvariantViolation (with the slot) if a placement
/// exceeds capacity or a virtual queue misbehaves.
RunRecord run_simulation(const SystemConfig& cfg, const RunOptions& options = {});

struct RegretSeries {
  std::vector<std::uint64_t> slot;
  std::vector<double> expected;  // R* - (1/t) sum L_f d_{n,f} X_{n,f}
  std::vector<double> realized;  // R* - (1/t) sum R_n
};

RegretSeries compute_regret(const RunRecord& record, double r_star);

/// One row of a summary table: terminal metrics of one run.
struct RunSummary {
  std::string axis = "none";
  std::string value;
  std::uint64_t replicate = 0;
  std::uint64_t config_hash = 0;
  Seeds seeds;
  std::string policy;
  double v = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t h_min = 0;
  double r_star = 0.0;
  double regret_expected = 0.0;
  double regret_realized = 0.0;
  double reward_avg = 0.0;
  double expected_reward_avg = 0.0;
  double total_cost_avg = 0.0;
  double queue_avg_total = 0.0;
  std::vector<double> cost_avg;
  double bound_B = 0.0;
  double bound_Gamma = 0.0;
  double bound = 0.0;
};

RunSummary summarize(const RunRecord& record);

enum class SweepAxis { v, horizon, history, budget, policy };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// Parses "cphbl", "cphbl-ucbt", "cphbl-greedy:<eps>", "mcucb", "lfu",
/// "lru", "noop", "oracle".
PolicySpec parse_policy_label(std::string_view label);

/// Copy of `cfg` with one axis set from its textual value. History values
/// accept a number, "<k>T" (k times the horizon) or "TlogT".
SystemConfig apply_axis(const SystemConfig& cfg, SweepAxis axis, std::string_view value);

struct SweepOptions {
  std::size_t seeds = 1;
  unsigned jobs = 1;
  RunOptions run;
  bool keep_records = false;
  std::function<void(const RunSummary&)> on_run;
};

struct SweepResult {
  std::vector<RunSummary> rows;
  std::vector<RunRecord> records;  // filled when keep_records
};

/// One run per (value, replicate). Replicate i uses replicate_seeds(base, i)
/// at every value, so points are paired by seed. Rows come back ordered by
/// value, then replicate, regardless of `jobs`.
SweepResult sweep(const SystemConfig& tmpl, SweepAxis axis, std::span<const std::string> values,
                  const SweepOptions& options);

/// Time-series CSV: one row per checkpoint.
std::string timeseries_csv(const RunRecord& record);
/// Summary CSV: one row per run.
std::string summary_csv(std::span<const RunSummary> rows, std::size_t num_efs);

void write_timeseries_csv(const RunRecord& record, const std::filesystem::path& path);
void write_summary_csv(std::span<const RunSummary> rows, std::size_t num_efs, const std::filesystem::path& path);

}  // namespace cphbl
