#include "cphbl/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <memory>
#include <thread>

#include "cphbl/csv.hpp"
#include "cphbl/errors.hpp"
#include "cphbl/policies.hpp"

namespace cphbl {

double BoundReport::bound(std::uint64_t horizon, double v, std::uint64_t h_min) const {
  const double T = static_cast<double>(horizon);
  return B / v + 4.0 * sum_users_capacity / T +
         Gamma * std::sqrt(std::log(T) / (T + static_cast<double>(h_min)));
}

BoundReport theoretical_bounds(const SystemConfig& cfg) {
  BoundReport r;
  const double alpha = cfg.unit_storage_cost;
  const double catalog = static_cast<double>(cfg.catalog_size());
  for (std::size_t n = 0; n < cfg.num_efs; ++n) {
    const double b = cfg.budget[n];
    const double M = static_cast<double>(cfg.efs_capacity[n]);
    const double K = static_cast<double>(cfg.users_at(n));
    r.B += (b * b + alpha * alpha * M * M) / 2.0;
    r.Gamma += 2.0 * K * std::sqrt(6.0 * M * catalog);
    r.sum_users_capacity += K * M;
  }
  return r;
}

double Checkpoint::total_cost_avg() const {
  double total = 0.0;
  for (double c : cost) total += c;
  return total / static_cast<double>(slot);
}

RunRecord run_simulation(const SystemConfig& cfg, const RunOptions& options) {
  if (cfg.horizon == 0) throw std::invalid_argument("run_simulation: horizon must be at least 1 slot");
  const auto started = std::chrono::steady_clock::now();

  const auto model = PopularityModel::from_config(cfg);
  RngStream history_rng(cfg.seeds.history, StreamTag::history);
  const auto history = generate_history(model, cfg.history_counts, history_rng);

  RunRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.seeds = cfg.seeds;
  rec.policy = policy_label(cfg.policy);
  rec.num_efs = cfg.num_efs;
  rec.horizon = cfg.horizon;
  rec.v = cfg.v_param;
  rec.h_min = cfg.min_history();
  rec.budget = cfg.budget;
  rec.r_star = options.r_star != nullptr ? *options.r_star : r_star(cfg, model);
  rec.bounds = theoretical_bounds(cfg);

  auto policy = make_policy(cfg, history, rec.r_star.mixtures);

  std::unique_ptr<DemandSource> source;
  if (options.replay != nullptr) {
    source = std::make_unique<ReplayDemand>(*options.replay, cfg.efs_users);
  } else {
    source = std::make_unique<GeneratedDemand>(model, RngStream(cfg.seeds.demand, StreamTag::demand));
  }

  const auto N = cfg.num_efs;
  const auto F = cfg.num_files();
  const auto stride = std::max<std::uint64_t>(options.checkpoint_stride, 1);
  rec.checkpoints.reserve(static_cast<std::size_t>(cfg.horizon / stride + 1));

  DemandMatrix demand(N, F, cfg.num_users);
  SlotOutcome outcome;
  std::vector<double> queue(N, 0.0);
  Checkpoint acc;
  acc.cost.assign(N, 0.0);
  acc.queue.assign(N, 0.0);

  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    const Placement& x = policy->decide(t);
    for (std::size_t n = 0; n < N; ++n) {
      const auto row = x.row(n);
      if (used_storage(row, cfg.file_sizes) > cfg.efs_capacity[n]) {
        throw InvariantViolation(t, "placement on EFS " + std::to_string(n) + " exceeds capacity");
      }
      const auto mean = model.mean_row(n);
      for (std::size_t f = 0; f < F; ++f) {
        if (row[f] != 0) acc.expected_reward += static_cast<double>(cfg.file_sizes[f]) * mean[f];
      }
      acc.queue_total += queue[n];
    }

    source->next(t, demand);
    if (options.record_trace != nullptr) options.record_trace->append(demand);
    policy->observe(t, demand, outcome);

    const auto q = policy->queues();
    for (std::size_t n = 0; n < N; ++n) {
      const double cost = outcome.cost[n];
      if (!(cost >= 0.0) || cost > cfg.unit_storage_cost * static_cast<double>(cfg.efs_capacity[n])) {
        throw InvariantViolation(t, "storage cost on EFS " + std::to_string(n) + " outside [0, alpha M_n]");
      }
      acc.reward += outcome.reward[n];
      acc.cost[n] += cost;
      if (!q.empty()) {
        if (!(q[n] >= 0.0) || !std::isfinite(q[n])) {
          throw InvariantViolation(t, "virtual queue " + std::to_string(n) + " is negative or not finite");
        }
        if (q[n] > queue[n] + cost) {
          throw InvariantViolation(t, "virtual queue " + std::to_string(n) + " grew by more than its input");
        }
        queue[n] = q[n];
      }
    }

    if ((t + 1) % stride == 0 || t + 1 == cfg.horizon) {
      acc.slot = t + 1;
      acc.queue = queue;
      rec.checkpoints.push_back(acc);
    }
  }

  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

RegretSeries compute_regret(const RunRecord& record, double r_star) {
  RegretSeries s;
  for (const auto& cp : record.checkpoints) {
    s.slot.push_back(cp.slot);
    s.expected.push_back(r_star - cp.expected_reward_avg());
    s.realized.push_back(r_star - cp.reward_avg());
  }
  return s;
}

RunSummary summarize(const RunRecord& record) {
  const auto& cp = record.terminal();
  RunSummary s;
  s.config_hash = record.config_hash;
  s.seeds = record.seeds;
  s.policy = record.policy;
  s.v = record.v;
  s.horizon = record.horizon;
  s.h_min = record.h_min;
  s.r_star = record.r_star.total;
  s.regret_expected = s.r_star - cp.expected_reward_avg();
  s.regret_realized = s.r_star - cp.reward_avg();
  s.reward_avg = cp.reward_avg();
  s.expected_reward_avg = cp.expected_reward_avg();
  s.total_cost_avg = cp.total_cost_avg();
  s.queue_avg_total = cp.queue_avg_total();
  for (std::size_t n = 0; n < record.num_efs; ++n) s.cost_avg.push_back(cp.cost_avg(n));
  s.bound_B = record.bounds.B;
  s.bound_Gamma = record.bounds.Gamma;
  s.bound = record.bounds.bound(cp.slot, record.v, record.h_min);
  return s;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::v, SweepAxis::horizon, SweepAxis::history, SweepAxis::budget, SweepAxis::policy}) {
    if (to_string(a) == name) return a;
  }
  if (name == "V") return SweepAxis::v;
  if (name == "T") return SweepAxis::horizon;
  if (name == "H_min" || name == "h_min") return SweepAxis::history;
  if (name == "b") return SweepAxis::budget;
  throw ConfigError({"unknown sweep axis '" + std::string(name) + "' (expected V, T, H_min, b, policy)"});
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::v: return "V";
    case SweepAxis::horizon: return "T";
    case SweepAxis::history: return "H_min";
    case SweepAxis::budget: return "b";
    case SweepAxis::policy: return "policy";
  }
  return "?";
}

PolicySpec parse_policy_label(std::string_view label) {
  PolicySpec spec;
  if (label == "cphbl-ucbt") {
    spec.estimator = Estimator::ucbt;
    return spec;
  }
  if (label.starts_with("cphbl-greedy")) {
    spec.estimator = Estimator::greedy;
    auto rest = label.substr(std::string_view("cphbl-greedy").size());
    if (!rest.empty()) {
      if (rest.front() != ':') throw ConfigError({"malformed policy label '" + std::string(label) + "'"});
      try {
        spec.epsilon = csv::parse_double(rest.substr(1));
      } catch (const IoError&) {
        throw ConfigError({"malformed epsilon in policy label '" + std::string(label) + "'"});
      }
    }
    return spec;
  }
  spec.kind = parse_policy_kind(label);
  return spec;
}

namespace {

double parse_number(std::string_view text, std::string_view what) {
  try {
    return csv::parse_double(text);
  } catch (const IoError&) {
    throw ConfigError({"invalid " + std::string(what) + " value '" + std::string(text) + "'"});
  }
}

std::uint64_t parse_history_value(std::string_view text, std::uint64_t horizon) {
  const double T = static_cast<double>(horizon);
  if (text == "TlogT") return static_cast<std::uint64_t>(std::llround(T * std::log(T)));
  if (text.ends_with('T')) {
    auto factor = text.substr(0, text.size() - 1);
    const double k = factor.empty() ? 1.0 : parse_number(factor, "history");
    return static_cast<std::uint64_t>(std::llround(k * T));
  }
  const double h = parse_number(text, "history");
  if (h < 0.0 || h != std::floor(h)) throw ConfigError({"history count must be a non-negative integer"});
  return static_cast<std::uint64_t>(h);
}

}  // namespace

SystemConfig apply_axis(const SystemConfig& cfg, SweepAxis axis, std::string_view value) {
  SystemConfig out = cfg;
  switch (axis) {
    case SweepAxis::v: out.v_param = parse_number(value, "V"); break;
    case SweepAxis::horizon: {
      const double T = parse_number(value, "T");
      if (T < 1.0 || T != std::floor(T)) throw ConfigError({"T must be a positive integer"});
      out.horizon = static_cast<std::uint64_t>(T);
      break;
    }
    case SweepAxis::history: set_uniform_history(out, parse_history_value(value, out.horizon)); break;
    case SweepAxis::budget: out.budget.assign(out.num_efs, parse_number(value, "b")); break;
    case SweepAxis::policy: out.policy = parse_policy_label(value); break;
  }
  return validate_config(std::move(out));
}

SweepResult sweep(const SystemConfig& tmpl, SweepAxis axis, std::span<const std::string> values,
                  const SweepOptions& options) {
  struct Job {
    SystemConfig cfg;
    std::string value;
    std::uint64_t replicate;
    std::size_t point;
  };
  std::vector<Job> jobs;
  std::vector<SystemConfig> point_cfgs;
  for (std::size_t p = 0; p < values.size(); ++p) {
    auto base = apply_axis(tmpl, axis, values[p]);
    point_cfgs.push_back(base);
    for (std::uint64_t r = 0; r < options.seeds; ++r) {
      auto c = base;
      c.seeds = replicate_seeds(tmpl.seeds, r);
      jobs.push_back({std::move(c), values[p], r, p});
    }
  }

  // The optimum only moves with the budget axis; compute it once per point.
  std::vector<RStar> optima;
  for (std::size_t p = 0; p < point_cfgs.size(); ++p) {
    if (p > 0 && axis != SweepAxis::budget) {
      optima.push_back(optima.front());
      continue;
    }
    optima.push_back(r_star(point_cfgs[p], PopularityModel::from_config(point_cfgs[p])));
  }

  SweepResult result;
  result.rows.resize(jobs.size());
  if (options.keep_records) result.records.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        RunOptions ro = options.run;
        ro.r_star = &optima[jobs[i].point];
        auto rec = run_simulation(jobs[i].cfg, ro);
        auto row = summarize(rec);
        row.axis = std::string(to_string(axis));
        row.value = jobs[i].value;
        row.replicate = jobs[i].replicate;
        result.rows[i] = row;
        if (options.keep_records) result.records[i] = std::move(rec);
        if (options.on_run) {
          std::lock_guard lock(report_mutex);
          options.on_run(row);
        }
      } catch (...) {
        std::lock_guard lock(report_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
        return;
      }
    }
  };

  const unsigned threads = std::max(1U, std::min<unsigned>(options.jobs, static_cast<unsigned>(jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string timeseries_csv(const RunRecord& record) {
  using csv::format_double;
  std::string out = "schema_version,slot,total_reward_avg,expected_reward_avg,regret_expected,regret_realized";
  for (std::size_t n = 1; n <= record.num_efs; ++n) out += ",cost_avg_efs_" + std::to_string(n);
  for (std::size_t n = 1; n <= record.num_efs; ++n) out += ",queue_" + std::to_string(n);
  out += ",queue_avg_total,bound\n";

  const double rs = record.r_star.total;
  for (const auto& cp : record.checkpoints) {
    out += std::to_string(kCsvSchemaVersion);
    out += ',' + std::to_string(cp.slot);
    out += ',' + format_double(cp.reward_avg());
    out += ',' + format_double(cp.expected_reward_avg());
    out += ',' + format_double(rs - cp.expected_reward_avg());
    out += ',' + format_double(rs - cp.reward_avg());
    for (std::size_t n = 0; n < record.num_efs; ++n) out += ',' + format_double(cp.cost_avg(n));
    for (std::size_t n = 0; n < record.num_efs; ++n) out += ',' + format_double(cp.queue[n]);
    out += ',' + format_double(cp.queue_avg_total());
    out += ',' + format_double(record.bounds.bound(cp.slot, record.v, record.h_min));
    out += '\n';
  }
  return out;
}

std::string summary_csv(std::span<const RunSummary> rows, std::size_t num_efs) {
  using csv::format_double;
  const std::size_t N = num_efs;
  std::string out =
      "schema_version,axis,value,replicate,config_hash,seed_demand,seed_history,seed_policy,policy,v,horizon,h_min,"
      "r_star,regret_expected,regret_realized,total_reward_avg,expected_reward_avg,total_cost_avg,queue_avg_total";
  for (std::size_t n = 1; n <= N; ++n) out += ",cost_avg_efs_" + std::to_string(n);
  out += ",bound_B,bound_Gamma,bound\n";
  for (const auto& r : rows) {
    out += std::to_string(kCsvSchemaVersion);
    out += ',' + r.axis + ',' + r.value + ',' + std::to_string(r.replicate) + ',' + hex64(r.config_hash);
    out += ',' + std::to_string(r.seeds.demand) + ',' + std::to_string(r.seeds.history) + ',' +
           std::to_string(r.seeds.policy);
    out += ',' + r.policy + ',' + format_double(r.v) + ',' + std::to_string(r.horizon) + ',' +
           std::to_string(r.h_min);
    for (double x : {r.r_star, r.regret_expected, r.regret_realized, r.reward_avg, r.expected_reward_avg,
                     r.total_cost_avg, r.queue_avg_total}) {
      out += ',' + format_double(x);
    }
    for (std::size_t n = 0; n < N; ++n) out += ',' + format_double(n < r.cost_avg.size() ? r.cost_avg[n] : 0.0);
    out += ',' + format_double(r.bound_B) + ',' + format_double(r.bound_Gamma) + ',' + format_double(r.bound);
    out += '\n';
  }
  return out;
}

void write_timeseries_csv(const RunRecord& record, const std::filesystem::path& path) {
  csv::write_file(path, timeseries_csv(record));
}

void write_summary_csv(std::span<const RunSummary> rows, std::size_t num_efs, const std::filesystem::path& path) {
  csv::write_file(path, summary_csv(rows, num_efs));
}

}  // namespace cphbl
