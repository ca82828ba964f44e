#include "cphbl/policies.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace cphbl {

namespace {

/// Uniform exploration: keep drawing a still-fitting candidate until none
/// fits. `candidates` is consumed.
void explore_fill(std::vector<std::size_t>& candidates, std::span<const std::int64_t> sizes, std::int64_t capacity,
                  RngStream& rng, std::span<std::uint8_t> row) {
  std::fill(row.begin(), row.end(), std::uint8_t{0});
  std::int64_t room = capacity;
  while (true) {
    std::erase_if(candidates, [&](std::size_t f) { return sizes[f] > room; });
    if (candidates.empty()) break;
    const auto pick = rng.uniform_index(candidates.size());
    const auto f = candidates[pick];
    row[f] = 1;
    room -= sizes[f];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
  }
}

}  // namespace

PolicyContext PolicyContext::from_config(const SystemConfig& cfg) {
  PolicyContext ctx;
  ctx.num_efs = cfg.num_efs;
  ctx.num_files = cfg.num_files();
  ctx.sizes = cfg.file_sizes;
  ctx.capacity = cfg.efs_capacity;
  ctx.budget = cfg.budget;
  ctx.efs_users = cfg.efs_users;
  for (auto& users : ctx.efs_users) std::sort(users.begin(), users.end());
  ctx.alpha = cfg.unit_storage_cost;
  ctx.v = cfg.v_param;
  return ctx;
}

double slot_reward(std::span<const std::uint8_t> row, std::span<const std::uint32_t> demand_row,
                   std::span<const std::int64_t> sizes) {
  double r = 0.0;
  for (std::size_t f = 0; f < row.size(); ++f) {
    if (row[f] != 0) r += static_cast<double>(sizes[f]) * static_cast<double>(demand_row[f]);
  }
  return r;
}

double slot_cost(std::span<const std::uint8_t> row, std::span<const std::int64_t> sizes, double alpha) {
  return alpha * static_cast<double>(used_storage(row, sizes));
}

GreedySelection epsilon_greedy_select(std::span<const double> means, double backlog, const EfsParams& params,
                                      double epsilon, RngStream& rng) {
  GreedySelection out;
  out.row.assign(params.sizes.size(), 0);
  out.explored = rng.bernoulli(epsilon);
  if (out.explored) {
    auto weights = compute_weights(means, backlog, params.sizes, params.v, params.alpha);
    explore_fill(weights.admissible, params.sizes, params.capacity, rng, out.row);
  } else {
    PlacementSolver solver;
    solver.solve(means, backlog, params, out.row);
  }
  return out;
}

// --- CPHBL -------------------------------------------------------------------

CphblPolicy::CphblPolicy(PolicyContext ctx, ArmTable stats, Estimator estimator, double epsilon, RngStream rng)
    : ctx_(std::move(ctx)),
      stats_(std::move(stats)),
      estimator_(estimator),
      epsilon_(epsilon),
      rng_(std::move(rng)),
      queues_(ctx_.num_efs, 0.0),
      estimates_(ctx_.num_efs * ctx_.num_files, 0.0),
      placement_(ctx_.num_efs, ctx_.num_files) {}

std::string CphblPolicy::name() const {
  return policy_label(PolicySpec{PolicyKind::cphbl, estimator_, epsilon_});
}

const Placement& CphblPolicy::decide(std::uint64_t t) {
  const auto F = ctx_.num_files;
  for (std::size_t n = 0; n < ctx_.num_efs; ++n) {
    const double K = ctx_.users(n);
    auto est = std::span<double>(estimates_).subspan(n * F, F);
    for (std::size_t f = 0; f < F; ++f) est[f] = popularity_estimate(stats_.at(n, f), t, K, estimator_);

    const auto params = ctx_.efs_params(n);
    auto row = placement_.row(n);
    if (estimator_ == Estimator::greedy && rng_.bernoulli(epsilon_)) {
      ++explorations_;
      compute_weights(est, queues_[n], params.sizes, params.v, params.alpha, scratch_weights_);
      scratch_ = scratch_weights_.admissible;
      explore_fill(scratch_, params.sizes, params.capacity, rng_, row);
    } else {
      solver_.solve(est, queues_[n], params, row);
    }
  }
  return placement_;
}

void CphblPolicy::observe(std::uint64_t /*t*/, const DemandMatrix& demand, SlotOutcome& out) {
  out.reward.resize(ctx_.num_efs);
  out.cost.resize(ctx_.num_efs);
  for (std::size_t n = 0; n < ctx_.num_efs; ++n) {
    const auto row = placement_.row(n);
    const auto d = demand.row(n);
    out.reward[n] = slot_reward(row, d, ctx_.sizes);
    out.cost[n] = slot_cost(row, ctx_.sizes, ctx_.alpha);
    for (std::size_t f = 0; f < ctx_.num_files; ++f) update_stats(stats_.at(n, f), d[f], row[f] != 0);
    queues_[n] = update_queue(queues_[n], ctx_.budget[n], out.cost[n]);
  }
}

// --- MCUCB -------------------------------------------------------------------

McucbPolicy::McucbPolicy(PolicyContext ctx)
    : ctx_(std::move(ctx)),
      stats_(ctx_.num_efs, ctx_.num_files,
             [this] {
               std::vector<std::size_t> k;
               for (const auto& u : ctx_.efs_users) k.push_back(u.size());
               return k;
             }()),
      values_(ctx_.num_files, 0.0),
      placement_(ctx_.num_efs, ctx_.num_files) {}

const Placement& McucbPolicy::decide(std::uint64_t t) {
  for (std::size_t n = 0; n < ctx_.num_efs; ++n) {
    const double K = ctx_.users(n);
    for (std::size_t f = 0; f < ctx_.num_files; ++f) {
      values_[f] = static_cast<double>(ctx_.sizes[f]) * popularity_estimate(stats_.at(n, f), t, K, Estimator::hucb1);
    }
    solver_.solve_values(values_, ctx_.sizes, ctx_.capacity[n], placement_.row(n));
  }
  return placement_;
}

void McucbPolicy::observe(std::uint64_t /*t*/, const DemandMatrix& demand, SlotOutcome& out) {
  out.reward.resize(ctx_.num_efs);
  out.cost.resize(ctx_.num_efs);
  for (std::size_t n = 0; n < ctx_.num_efs; ++n) {
    const auto row = placement_.row(n);
    const auto d = demand.row(n);
    out.reward[n] = slot_reward(row, d, ctx_.sizes);
    out.cost[n] = slot_cost(row, ctx_.sizes, ctx_.alpha);
    for (std::size_t f = 0; f < ctx_.num_files; ++f) update_stats(stats_.at(n, f), d[f], row[f] != 0);
  }
}

// --- LFU / LRU -----------------------------------------------------------------

ReactivePolicy::ReactivePolicy(PolicyContext ctx, Rule rule)
    : ctx_(std::move(ctx)),
      rule_(rule),
      resident_(ctx_.num_efs, ctx_.num_files),
      start_of_slot_(ctx_.num_efs, ctx_.num_files),
      meta_(ctx_.num_efs * ctx_.num_files, 0),
      used_(ctx_.num_efs, 0) {}

const Placement& ReactivePolicy::decide(std::uint64_t /*t*/) {
  start_of_slot_ = resident_;
  return start_of_slot_;
}

bool ReactivePolicy::request(std::size_t efs, std::size_t file, std::uint64_t stamp) {
  const auto F = ctx_.num_files;
  auto row = resident_.row(efs);
  auto meta = std::span<std::uint64_t>(meta_).subspan(efs * F, F);
  if (row[file] != 0) {
    if (rule_ == Rule::lfu) {
      ++meta[file];
    } else {
      meta[file] = stamp;
    }
    return true;
  }

  const auto size = ctx_.sizes[file];
  const auto capacity = ctx_.capacity[efs];
  if (size > capacity) return false;
  while (capacity - used_[efs] < size) {
    std::size_t victim = F;
    for (std::size_t g = 0; g < F; ++g) {
      if (row[g] != 0 && (victim == F || meta[g] < meta[victim])) victim = g;
    }
    row[victim] = 0;
    meta[victim] = 0;
    used_[efs] -= ctx_.sizes[victim];
  }
  row[file] = 1;
  used_[efs] += size;
  meta[file] = rule_ == Rule::lfu ? 1 : stamp;
  return false;
}

void ReactivePolicy::observe(std::uint64_t t, const DemandMatrix& demand, SlotOutcome& out) {
  out.reward.resize(ctx_.num_efs);
  out.cost.resize(ctx_.num_efs);
  const auto K = static_cast<std::uint64_t>(demand.requests.size());
  for (std::size_t n = 0; n < ctx_.num_efs; ++n) {
    double reward = 0.0;
    for (auto k : ctx_.efs_users[n]) {
      const auto f = demand.requests[k];
      // Stamps are (slot, user) in lexicographic order; +1 keeps them positive.
      if (request(n, f, t * K + k + 1)) reward += static_cast<double>(ctx_.sizes[f]);
    }
    out.reward[n] = reward;
    out.cost[n] = ctx_.alpha * static_cast<double>(used_[n]);
  }
}

// --- No-op and oracle mixture --------------------------------------------------

NoopPolicy::NoopPolicy(PolicyContext ctx) : ctx_(std::move(ctx)), placement_(ctx_.num_efs, ctx_.num_files) {}

void NoopPolicy::observe(std::uint64_t /*t*/, const DemandMatrix& /*demand*/, SlotOutcome& out) {
  out.reward.assign(ctx_.num_efs, 0.0);
  out.cost.assign(ctx_.num_efs, 0.0);
}

MixturePolicy::MixturePolicy(PolicyContext ctx, std::vector<Mixture> mixtures, RngStream rng)
    : ctx_(std::move(ctx)),
      mixtures_(std::move(mixtures)),
      rng_(std::move(rng)),
      placement_(ctx_.num_efs, ctx_.num_files) {
  if (mixtures_.size() != ctx_.num_efs) throw std::invalid_argument("MixturePolicy: one mixture per EFS");
}

const Placement& MixturePolicy::decide(std::uint64_t /*t*/) {
  for (std::size_t n = 0; n < ctx_.num_efs; ++n) {
    const auto& support = mixtures_[n].support;
    const double u = rng_.uniform01();
    double acc = 0.0;
    std::size_t pick = support.size() - 1;
    for (std::size_t i = 0; i < support.size(); ++i) {
      acc += support[i].probability;
      if (u < acc) {
        pick = i;
        break;
      }
    }
    std::copy(support[pick].row.begin(), support[pick].row.end(), placement_.row(n).begin());
  }
  return placement_;
}

void MixturePolicy::observe(std::uint64_t /*t*/, const DemandMatrix& demand, SlotOutcome& out) {
  out.reward.resize(ctx_.num_efs);
  out.cost.resize(ctx_.num_efs);
  for (std::size_t n = 0; n < ctx_.num_efs; ++n) {
    out.reward[n] = slot_reward(placement_.row(n), demand.row(n), ctx_.sizes);
    out.cost[n] = slot_cost(placement_.row(n), ctx_.sizes, ctx_.alpha);
  }
}

std::unique_ptr<Policy> make_policy(const SystemConfig& cfg, const HistorySet& history,
                                    const std::vector<Mixture>& mixtures) {
  auto ctx = PolicyContext::from_config(cfg);
  RngStream rng(cfg.seeds.policy, StreamTag::policy);
  switch (cfg.policy.kind) {
    case PolicyKind::cphbl:
      return std::make_unique<CphblPolicy>(std::move(ctx), init_stats(history, cfg.users_per_efs()),
                                           cfg.policy.estimator, cfg.policy.epsilon, std::move(rng));
    case PolicyKind::mcucb:
      return std::make_unique<McucbPolicy>(std::move(ctx));
    case PolicyKind::lfu:
      return std::make_unique<ReactivePolicy>(std::move(ctx), ReactivePolicy::Rule::lfu);
    case PolicyKind::lru:
      return std::make_unique<ReactivePolicy>(std::move(ctx), ReactivePolicy::Rule::lru);
    case PolicyKind::noop:
      return std::make_unique<NoopPolicy>(std::move(ctx));
    case PolicyKind::oracle:
      return std::make_unique<MixturePolicy>(std::move(ctx), mixtures, std::move(rng));
  }
  throw std::invalid_argument("make_policy: unknown policy kind");
}

}  // namespace cphbl
