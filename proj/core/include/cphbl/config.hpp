#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cphbl/errors.hpp"

namespace cphbl {

enum class PolicyKind { cphbl, mcucb, lfu, lru, noop, oracle };

/// Popularity estimator used by the CPHBL family.
enum class Estimator { hucb1, ucbt, greedy };

std::string_view to_string(PolicyKind kind);
std::string_view to_string(Estimator estimator);
PolicyKind parse_policy_kind(std::string_view name);
Estimator parse_estimator(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::cphbl;
  Estimator estimator = Estimator::hucb1;
  double epsilon = 0.0;  // only read by Estimator::greedy

  bool operator==(const PolicySpec&) const = default;
};

/// Short display label, e.g. "cphbl", "cphbl-ucbt", "cphbl-greedy(0.1)", "lfu".
std::string policy_label(const PolicySpec& spec);

/// Independent generator seeds. Each stream is further salted with its own
/// tag, so equal numeric seeds still give unrelated streams.
struct Seeds {
  std::uint64_t demand = 1;
  std::uint64_t history = 2;
  std::uint64_t policy = 3;

  bool operator==(const Seeds&) const = default;
};

/// Full experiment parameterization. Sizes and capacities are integral
/// storage units; costs and budgets are storage-cost units.
struct SystemConfig {
  std::size_t num_efs = 0;
  std::size_t num_users = 0;
  /// efs_users[n] lists the users served by EFS n. Must partition {0..K-1}.
  std::vector<std::vector<std::size_t>> efs_users;
  std::vector<std::int64_t> file_sizes;
  std::vector<std::int64_t> efs_capacity;
  double unit_storage_cost = 1.0;
  std::vector<double> budget;
  double v_param = 1.0;
  std::uint64_t horizon = 1;
  /// history_counts[n][f] = number of offline observations of D_{n,f}.
  std::vector<std::vector<std::uint64_t>> history_counts;
  /// Per-user Zipf skew; rank order equals file index order.
  std::vector<double> zipf_skew;
  Seeds seeds;
  PolicySpec policy;

  bool operator==(const SystemConfig&) const = default;

  std::size_t num_files() const noexcept { return file_sizes.size(); }
  std::size_t users_at(std::size_t efs) const { return efs_users.at(efs).size(); }
  std::int64_t catalog_size() const noexcept;
  std::uint64_t min_history() const noexcept;
  /// efs index of every user; requires a validated config.
  std::vector<std::size_t> user_to_efs() const;
  std::vector<std::size_t> users_per_efs() const;
};

/// Returns the config unchanged iff every invariant holds; otherwise throws
/// ConfigError listing each violation. Non-fatal observations (for example
/// a budget that can never bind) are appended to `warnings` when given.
SystemConfig validate_config(SystemConfig cfg, std::vector<std::string>* warnings = nullptr);

/// JSON text <-> config. Unknown keys and type mismatches are ConfigErrors.
/// Parsing does not validate; call validate_config afterwards.
SystemConfig parse_config(std::string_view json_text);
std::string dump_config(const SystemConfig& cfg, bool pretty = true);
SystemConfig load_config(const std::filesystem::path& path);
void save_config(const SystemConfig& cfg, const std::filesystem::path& path);

/// 64-bit FNV-1a of the compact canonical serialization.
std::uint64_t config_hash(const SystemConfig& cfg);

/// Desk-scale version of the reference fog setting: 4 EFSs, 20 users
/// (round-robin, 5 per EFS), 20 files of sizes {1,2,4,8}, M_n = 16,
/// alpha = 1, b_n = 8, V = 50, T = 2e5, H = 1000, skews drawn once from
/// [0.56, 1.2] with `skew_seed`.
SystemConfig reference_config(std::uint64_t skew_seed = 2021);

/// Sets every H_{n,f} to `count`.
void set_uniform_history(SystemConfig& cfg, std::uint64_t count);

/// Derives the three stream seeds from a single master seed.
Seeds seeds_from_master(std::uint64_t master);

/// Seeds for replicate `index` of a multi-seed experiment; replicate i uses
/// the same seeds at every sweep point (paired design).
Seeds replicate_seeds(const Seeds& base, std::uint64_t index);

}  // namespace cphbl
