#include "cphbl/demand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cphbl/csv.hpp"
#include "cphbl/errors.hpp"

namespace cphbl {

std::vector<double> zipf_pmf(double skew, std::size_t num_files) {
  if (num_files == 0) throw std::domain_error("zipf_pmf: catalog must contain at least one file");
  if (!(skew >= 0.0) || !std::isfinite(skew)) throw std::domain_error("zipf_pmf: skew must be finite and >= 0");
  std::vector<double> p(num_files);
  double total = 0.0;
  for (std::size_t f = 0; f < num_files; ++f) {
    p[f] = std::pow(static_cast<double>(f + 1), -skew);
    total += p[f];
  }
  for (auto& x : p) x /= total;
  return p;
}

PopularityModel::PopularityModel(std::vector<std::vector<double>> user_pmfs, std::vector<std::size_t> user_efs,
                                 std::size_t num_efs)
    : num_efs_(num_efs), num_files_(0), pmf_(std::move(user_pmfs)), user_efs_(std::move(user_efs)) {
  if (pmf_.size() != user_efs_.size()) throw std::invalid_argument("PopularityModel: one EFS index per user");
  if (!pmf_.empty()) num_files_ = pmf_.front().size();
  efs_users_.assign(num_efs_, {});
  mean_.assign(num_efs_ * num_files_, 0.0);
  cdf_.reserve(pmf_.size());
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    const auto& p = pmf_[k];
    if (p.size() != num_files_) throw std::invalid_argument("PopularityModel: pmfs must share one catalog");
    if (user_efs_[k] >= num_efs_) throw std::invalid_argument("PopularityModel: EFS index out of range");
    double total = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t f = 0; f < p.size(); ++f) {
      if (!(p[f] >= 0.0)) throw std::invalid_argument("PopularityModel: negative probability");
      if (p[f] > 0.0) last_positive = f;
      total += p[f];
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("PopularityModel: pmf does not sum to 1");

    std::vector<double> cdf(p.size());
    double running = 0.0;
    for (std::size_t f = 0; f < p.size(); ++f) {
      running += p[f];
      cdf[f] = f >= last_positive ? 1.0 : running;
    }
    cdf_.push_back(std::move(cdf));

    const auto n = user_efs_[k];
    efs_users_[n].push_back(k);
    for (std::size_t f = 0; f < num_files_; ++f) mean_[n * num_files_ + f] += p[f];
  }
}

PopularityModel PopularityModel::from_config(const SystemConfig& cfg) {
  std::vector<std::vector<double>> pmfs;
  pmfs.reserve(cfg.num_users);
  for (std::size_t k = 0; k < cfg.num_users; ++k) pmfs.push_back(zipf_pmf(cfg.zipf_skew.at(k), cfg.num_files()));
  return PopularityModel(std::move(pmfs), cfg.user_to_efs(), cfg.num_efs);
}

std::size_t PopularityModel::draw(std::size_t user, RngStream& rng) const {
  const auto& cdf = cdf_[user];
  const double u = rng.uniform01();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::size_t>(it - cdf.begin());
}

DemandMatrix sample_slot_demands(const PopularityModel& model, RngStream& rng) {
  DemandMatrix out(model.num_efs(), model.num_files(), model.num_users());
  sample_slot_demands(model, rng, out);
  return out;
}

void sample_slot_demands(const PopularityModel& model, RngStream& rng, DemandMatrix& out) {
  std::fill(out.counts.begin(), out.counts.end(), 0U);
  for (std::size_t k = 0; k < model.num_users(); ++k) {
    const auto f = model.draw(k, rng);
    out.requests[k] = static_cast<std::uint32_t>(f);
    ++out.counts[model.efs_of(k) * out.num_files + f];
  }
}

std::uint64_t HistorySet::min_count() const {
  if (counts.empty()) return 0;
  return *std::min_element(counts.begin(), counts.end());
}

HistorySet generate_history(const PopularityModel& model, const std::vector<std::vector<std::uint64_t>>& counts,
                            RngStream& rng) {
  const auto N = model.num_efs();
  const auto F = model.num_files();
  if (counts.size() != N) throw std::invalid_argument("generate_history: one count row per EFS");

  HistorySet h;
  h.num_efs = N;
  h.num_files = F;
  h.counts.assign(N * F, 0);
  h.sums.assign(N * F, 0);
  h.sum_squares.assign(N * F, 0);

  std::vector<std::uint64_t> slot(F);
  for (std::size_t n = 0; n < N; ++n) {
    if (counts[n].size() != F) throw std::invalid_argument("generate_history: one count per file");
    const auto rows = *std::max_element(counts[n].begin(), counts[n].end());
    for (std::size_t f = 0; f < F; ++f) h.counts[n * F + f] = counts[n][f];
    for (std::uint64_t s = 0; s < rows; ++s) {
      std::fill(slot.begin(), slot.end(), 0);
      for (auto k : model.users_of(n)) ++slot[model.draw(k, rng)];
      for (std::size_t f = 0; f < F; ++f) {
        if (s < counts[n][f]) {
          h.sums[n * F + f] += slot[f];
          h.sum_squares[n * F + f] += slot[f] * slot[f];
        }
      }
    }
  }
  return h;
}

void GeneratedDemand::next(std::uint64_t /*slot*/, DemandMatrix& out) { sample_slot_demands(model_, rng_, out); }

void DemandTrace::append(const DemandMatrix& d) {
  if (d.num_efs != num_efs_ || d.num_files != num_files_) throw std::invalid_argument("DemandTrace: shape mismatch");
  slots_.push_back(d.counts);
}

void DemandTrace::write_csv(const std::filesystem::path& path) const {
  std::string out = "slot,efs,file,count\n";
  for (std::size_t t = 0; t < slots_.size(); ++t) {
    for (std::size_t n = 0; n < num_efs_; ++n) {
      for (std::size_t f = 0; f < num_files_; ++f) {
        const auto c = slots_[t][n * num_files_ + f];
        if (c == 0) continue;
        out += std::to_string(t) + ',' + std::to_string(n) + ',' + std::to_string(f) + ',' + std::to_string(c) +
               '\n';
      }
    }
  }
  csv::write_file(path, out);
}

DemandTrace DemandTrace::read_csv(const std::filesystem::path& path, std::size_t num_efs, std::size_t num_files,
                                  std::uint64_t num_slots) {
  const auto table = csv::read_file(path);
  const auto c_slot = table.column("slot");
  const auto c_efs = table.column("efs");
  const auto c_file = table.column("file");
  const auto c_count = table.column("count");

  DemandTrace trace(num_efs, num_files);
  trace.slots_.assign(num_slots, std::vector<std::uint32_t>(num_efs * num_files, 0));
  for (const auto& row : table.rows) {
    const auto t = csv::parse_u64(row[c_slot]);
    const auto n = csv::parse_u64(row[c_efs]);
    const auto f = csv::parse_u64(row[c_file]);
    const auto c = csv::parse_u64(row[c_count]);
    if (t >= num_slots || n >= num_efs || f >= num_files) {
      throw IoError("'" + path.string() + "': trace entry (" + row[c_slot] + ", " + row[c_efs] + ", " +
                    row[c_file] + ") outside the configured shape");
    }
    trace.slots_[t][n * num_files + f] = static_cast<std::uint32_t>(c);
  }
  return trace;
}

ReplayDemand::ReplayDemand(const DemandTrace& trace, std::vector<std::vector<std::size_t>> efs_users)
    : trace_(trace), efs_users_(std::move(efs_users)) {
  for (auto& users : efs_users_) std::sort(users.begin(), users.end());
}

void ReplayDemand::next(std::uint64_t slot, DemandMatrix& out) {
  if (slot >= trace_.size()) throw IoError("demand trace ends before slot " + std::to_string(slot));
  const auto& counts = trace_.slot_counts(slot);
  std::copy(counts.begin(), counts.end(), out.counts.begin());
  for (std::size_t n = 0; n < efs_users_.size(); ++n) {
    const auto& users = efs_users_[n];
    std::size_t next_user = 0;
    for (std::size_t f = 0; f < out.num_files; ++f) {
      for (std::uint32_t c = 0; c < counts[n * out.num_files + f]; ++c) {
        if (next_user == users.size()) {
          throw IoError("demand trace slot " + std::to_string(slot) + " has more requests than users on EFS " +
                        std::to_string(n));
        }
        out.requests[users[next_user++]] = static_cast<std::uint32_t>(f);
      }
    }
    if (next_user != users.size()) {
      throw IoError("demand trace slot " + std::to_string(slot) + " has fewer requests than users on EFS " +
                    std::to_string(n));
    }
  }
}

}  // namespace cphbl
