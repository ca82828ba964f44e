#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cphbl/config.hpp"
#include "cphbl/rng.hpp"

namespace cphbl {

/// Zipf pmf over ranks 1..num_files: p_f proportional to f^(-skew).
/// Throws std::domain_error when num_files == 0 or skew < 0.
std::vector<double> zipf_pmf(double skew, std::size_t num_files);

/// Fixed per-user request distributions plus the derived per-EFS means
/// d_{n,f} = sum over users k of EFS n of p_{k,f}.
class PopularityModel {
 public:
  PopularityModel(std::vector<std::vector<double>> user_pmfs, std::vector<std::size_t> user_efs,
                  std::size_t num_efs);

  static PopularityModel from_config(const SystemConfig& cfg);

  std::size_t num_efs() const noexcept { return num_efs_; }
  std::size_t num_users() const noexcept { return pmf_.size(); }
  std::size_t num_files() const noexcept { return num_files_; }

  std::span<const double> pmf(std::size_t user) const { return pmf_.at(user); }
  std::size_t efs_of(std::size_t user) const { return user_efs_.at(user); }
  std::span<const std::size_t> users_of(std::size_t efs) const { return efs_users_.at(efs); }

  /// True mean d_{n,f} (requests per slot).
  double mean(std::size_t efs, std::size_t file) const { return mean_[efs * num_files_ + file]; }
  std::span<const double> mean_row(std::size_t efs) const {
    return std::span<const double>(mean_).subspan(efs * num_files_, num_files_);
  }

  /// One draw from user k's pmf.
  std::size_t draw(std::size_t user, RngStream& rng) const;

 private:
  std::size_t num_efs_;
  std::size_t num_files_;
  std::vector<std::vector<double>> pmf_;
  std::vector<std::vector<double>> cdf_;
  std::vector<std::size_t> user_efs_;
  std::vector<std::vector<std::size_t>> efs_users_;
  std::vector<double> mean_;
};

/// Aggregated per-slot demand D_{n,f}(t) plus the individual requests that
/// produced it (needed by reactive baselines that process requests in order).
struct DemandMatrix {
  std::size_t num_efs = 0;
  std::size_t num_files = 0;
  std::vector<std::uint32_t> counts;    // row-major N x F
  std::vector<std::uint32_t> requests;  // file requested by user k

  DemandMatrix() = default;
  DemandMatrix(std::size_t efs, std::size_t files, std::size_t users)
      : num_efs(efs), num_files(files), counts(efs * files, 0), requests(users, 0) {}

  std::uint32_t at(std::size_t efs, std::size_t file) const { return counts[efs * num_files + file]; }
  std::span<const std::uint32_t> row(std::size_t efs) const {
    return std::span<const std::uint32_t>(counts).subspan(efs * num_files, num_files);
  }
};

/// Every user requests exactly one file, in ascending user order.
DemandMatrix sample_slot_demands(const PopularityModel& model, RngStream& rng);
/// Allocation-free variant; `out` must already be sized for `model`.
void sample_slot_demands(const PopularityModel& model, RngStream& rng, DemandMatrix& out);

/// Offline observations: for every (n, f), count H_{n,f} plus the sum and
/// sum of squares of the H_{n,f} observed D_{n,f} values.
struct HistorySet {
  std::size_t num_efs = 0;
  std::size_t num_files = 0;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> sums;
  std::vector<std::uint64_t> sum_squares;

  std::uint64_t count(std::size_t n, std::size_t f) const { return counts[n * num_files + f]; }
  std::uint64_t sum(std::size_t n, std::size_t f) const { return sums[n * num_files + f]; }
  std::uint64_t sum_square(std::size_t n, std::size_t f) const { return sum_squares[n * num_files + f]; }
  std::uint64_t min_count() const;

  bool operator==(const HistorySet&) const = default;
};

/// Draws max_f H_{n,f} independent slots of EFS n's users and credits the
/// first H_{n,f} of them to file f. Uses only `rng` (the history stream).
HistorySet generate_history(const PopularityModel& model, const std::vector<std::vector<std::uint64_t>>& counts,
                            RngStream& rng);

/// Source of per-slot demand for a simulation: either the generator or a
/// replayed trace.
class DemandSource {
 public:
  virtual ~DemandSource() = default;
  virtual void next(std::uint64_t slot, DemandMatrix& out) = 0;
};

class GeneratedDemand final : public DemandSource {
 public:
  GeneratedDemand(const PopularityModel& model, RngStream rng) : model_(model), rng_(std::move(rng)) {}
  void next(std::uint64_t slot, DemandMatrix& out) override;

 private:
  const PopularityModel& model_;
  RngStream rng_;
};

/// In-memory demand trace; CSV columns slot,efs,file,count (zero counts
/// omitted on export).
class DemandTrace {
 public:
  DemandTrace(std::size_t num_efs, std::size_t num_files) : num_efs_(num_efs), num_files_(num_files) {}

  void append(const DemandMatrix& d);
  std::size_t size() const noexcept { return slots_.size(); }
  const std::vector<std::uint32_t>& slot_counts(std::size_t slot) const { return slots_.at(slot); }
  std::size_t num_efs() const noexcept { return num_efs_; }
  std::size_t num_files() const noexcept { return num_files_; }

  void write_csv(const std::filesystem::path& path) const;
  static DemandTrace read_csv(const std::filesystem::path& path, std::size_t num_efs, std::size_t num_files,
                              std::uint64_t num_slots);

 private:
  std::size_t num_efs_;
  std::size_t num_files_;
  std::vector<std::vector<std::uint32_t>> slots_;
};

/// Replays a trace. Per-user requests are reconstructed by handing files to
/// the EFS's users in ascending (user, file) order; only request order within
/// an EFS is synthetic, aggregate counts are exact.
class ReplayDemand final : public DemandSource {
 public:
  ReplayDemand(const DemandTrace& trace, std::vector<std::vector<std::size_t>> efs_users);
  void next(std::uint64_t slot, DemandMatrix& out) override;

 private:
  const DemandTrace& trace_;
  std::vector<std::vector<std::size_t>> efs_users_;
};

}  // namespace cphbl
