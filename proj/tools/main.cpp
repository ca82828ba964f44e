// Command-line driver: run, sweep, oracle, verify, config.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cphbl/config.hpp"
#include "cphbl/csv.hpp"
#include "cphbl/demand.hpp"
#include "cphbl/errors.hpp"
#include "cphbl/harness.hpp"
#include "cphbl/oracle.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using namespace cphbl;

namespace {

enum Exit : int { ok = 0, validation = 1, invariant = 2, io = 3 };

struct ConfigSource {
  std::string path;
  bool reference = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> v;
  std::optional<std::uint64_t> horizon;
  std::optional<std::string> history;
  std::optional<std::string> policy;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "JSON configuration file");
    cmd->add_flag("--reference", reference, "Use the built-in reference configuration");
    cmd->add_option("--seed", seed, "Master seed; derives the demand, history and policy seeds");
    cmd->add_option("--v", v, "Override the drift-plus-penalty weight V");
    cmd->add_option("--horizon,-T", horizon, "Override the number of slots T");
    cmd->add_option("--history", history, "Override every history count (number, <k>T or TlogT)");
    cmd->add_option("--policy", policy, "Override the policy (cphbl, cphbl-ucbt, cphbl-greedy:<eps>, mcucb, lfu, lru, noop, oracle)");
  }

  SystemConfig load() const {
    if (path.empty() == !reference) throw ConfigError({"exactly one of --config or --reference is required"});
    SystemConfig cfg = reference ? reference_config() : load_config(path);
    if (seed) cfg.seeds = seeds_from_master(*seed);
    if (v) cfg = apply_axis(cfg, SweepAxis::v, csv::format_double(*v));
    if (horizon) cfg = apply_axis(cfg, SweepAxis::horizon, std::to_string(*horizon));
    if (history) cfg = apply_axis(cfg, SweepAxis::history, *history);
    if (policy) cfg = apply_axis(cfg, SweepAxis::policy, *policy);
    std::vector<std::string> warnings;
    cfg = validate_config(std::move(cfg), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
  }
};

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  for (auto part : csv::split(text, ',')) out.emplace_back(part);
  return out;
}

void print_bounds(const SystemConfig& cfg, const BoundReport& b) {
  std::cout << "B = " << csv::format_double(b.B) << "\n";
  std::cout << "Gamma = " << csv::format_double(b.Gamma) << "\n";
  std::cout << "sum K_n M_n = " << csv::format_double(b.sum_users_capacity) << "\n";
  std::cout << "queue numerator (V=" << csv::format_double(cfg.v_param)
            << ") = " << csv::format_double(b.queue_numerator(cfg.v_param)) << "\n";
  std::cout << "regret bound (T=" << cfg.horizon << ", V=" << csv::format_double(cfg.v_param)
            << ", H_min=" << cfg.min_history() << ") = "
            << csv::format_double(b.bound(cfg.horizon, cfg.v_param, cfg.min_history())) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted edge-cache placement simulator with history-aware bandit learning"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Simulate one configuration and write its CSVs");
  ConfigSource run_src;
  run_src.attach(run_cmd);
  std::string run_out = "out";
  std::uint64_t stride = 1000;
  bool per_slot = false;
  std::string record_path;
  std::string replay_path;
  run_cmd->add_option("--out-dir", run_out, "Output directory")->capture_default_str();
  run_cmd->add_option("--checkpoint-stride", stride, "Slots between checkpoints")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_flag("--per-slot", per_slot, "Keep every slot in the time series");
  run_cmd->add_option("--record-trace", record_path, "Write the drawn demands to this CSV");
  run_cmd->add_option("--replay-trace", replay_path, "Replay demands from this CSV instead of sampling");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one simulation per axis value and seed");
  ConfigSource sweep_src;
  sweep_src.attach(sweep_cmd);
  std::string axis_name;
  std::string values_text;
  std::size_t seeds = 1;
  unsigned jobs = 1;
  std::string sweep_out = "out";
  bool sweep_series = false;
  sweep_cmd->add_option("--axis", axis_name, "V, T, H_min, b or policy")->required();
  sweep_cmd->add_option("--values", values_text, "Comma-separated axis values")->required();
  sweep_cmd->add_option("--seeds", seeds, "Replicates per value")->capture_default_str();
  sweep_cmd->add_option("--jobs,-j", jobs, "Concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out-dir", sweep_out, "Output directory")->capture_default_str();
  sweep_cmd->add_option("--checkpoint-stride", stride, "Slots between checkpoints")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--timeseries", sweep_series, "Also write one time-series CSV per run");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Print R* and the bound constants for a configuration");
  ConfigSource oracle_src;
  oracle_src.attach(oracle_cmd);
  bool lagrangian = false;
  oracle_cmd->add_flag("--lagrangian", lagrangian, "Use the multiplier search even when enumeration is possible");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Check the knapsack and optimum solvers on random instances");
  tools::VerifyOptions vopt;
  verify_cmd->add_option("--seed", vopt.seed)->capture_default_str();
  verify_cmd->add_option("--knapsack-instances", vopt.knapsack_instances)->capture_default_str();
  verify_cmd->add_option("--oracle-instances", vopt.oracle_instances)->capture_default_str();

  // config
  auto* config_cmd = app.add_subcommand("config", "Print the reference configuration as JSON");
  std::uint64_t skew_seed = 2021;
  config_cmd->add_option("--skew-seed", skew_seed, "Seed for the per-user Zipf skews")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Exit::ok : Exit::validation;
  }

  try {
    if (*run_cmd) {
      const auto cfg = run_src.load();
      RunOptions opts;
      opts.checkpoint_stride = per_slot ? 1 : stride;
      std::optional<DemandTrace> replay;
      if (!replay_path.empty()) {
        replay = DemandTrace::read_csv(replay_path, cfg.num_efs, cfg.num_files(), cfg.horizon);
        opts.replay = &*replay;
      }
      std::optional<DemandTrace> record;
      if (!record_path.empty()) {
        record.emplace(cfg.num_efs, cfg.num_files());
        opts.record_trace = &*record;
      }
      const auto rec = run_simulation(cfg, opts);
      const fs::path dir = run_out;
      save_config(cfg, dir / "config.json");
      write_timeseries_csv(rec, dir / "timeseries.csv");
      const auto row = summarize(rec);
      write_summary_csv(std::span(&row, 1), cfg.num_efs, dir / "summary.csv");
      if (record) record->write_csv(record_path);
      std::fprintf(stderr, "%s: T=%llu regret=%s R*=%s (%.2fs)\n", rec.policy.c_str(),
                   static_cast<unsigned long long>(rec.horizon), csv::format_double(row.regret_expected).c_str(),
                   csv::format_double(row.r_star).c_str(), rec.wall_seconds);
      return Exit::ok;
    }

    if (*sweep_cmd) {
      const auto cfg = sweep_src.load();
      const auto axis = parse_sweep_axis(axis_name);
      const auto values = split_values(values_text);
      SweepOptions so;
      so.seeds = seeds;
      so.jobs = jobs;
      so.run.checkpoint_stride = stride;
      so.keep_records = sweep_series;
      so.on_run = [](const RunSummary& r) {
        std::fprintf(stderr, "%s=%s replicate %llu: regret=%s\n", r.axis.c_str(), r.value.c_str(),
                     static_cast<unsigned long long>(r.replicate), csv::format_double(r.regret_expected).c_str());
      };
      const auto result = sweep(cfg, axis, values, so);
      const fs::path dir = sweep_out;
      write_summary_csv(result.rows, cfg.num_efs, dir / "summary.csv");
      for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& r = result.rows[i];
        write_timeseries_csv(result.records[i],
                             dir / ("timeseries_" + r.value + "_" + std::to_string(r.replicate) + ".csv"));
      }
      return Exit::ok;
    }

    if (*oracle_cmd) {
      const auto cfg = oracle_src.load();
      const auto rs = r_star(cfg, PopularityModel::from_config(cfg), lagrangian);
      for (std::size_t n = 0; n < cfg.num_efs; ++n) {
        std::cout << "R*_" << n + 1 << " = " << csv::format_double(rs.per_efs[n]);
        for (const auto& c : rs.mixtures[n].support) {
          std::cout << "  [p=" << csv::format_double(c.probability) << " cost=" << csv::format_double(c.cost) << "]";
        }
        std::cout << "\n";
      }
      std::cout << "R* = " << csv::format_double(rs.total) << "\n";
      print_bounds(cfg, theoretical_bounds(cfg));
      return Exit::ok;
    }

    if (*verify_cmd) {
      return tools::run_verify(vopt, std::cout) == 0 ? Exit::ok : Exit::invariant;
    }

    if (*config_cmd) {
      std::cout << dump_config(reference_config(skew_seed)) << "\n";
      return Exit::ok;
    }
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) std::cerr << "config error: " << v << "\n";
    return Exit::validation;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated at slot " << e.slot() << ": " << e.what() << "\n";
    return Exit::invariant;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return Exit::io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::invariant;
  }
  return Exit::ok;
}
