#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cphbl/csv.hpp"
#include "cphbl/errors.hpp"
#include "cphbl/harness.hpp"
#include "reference.hpp"

using namespace cphbl;

namespace {

SystemConfig quick_reference(std::uint64_t horizon) {
  auto cfg = reference_config();
  cfg.horizon = horizon;
  return validate_config(cfg);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Per-slot increments of a cumulative checkpoint series (stride 1).
template <typename F>
std::vector<double> increments(const RunRecord& rec, F&& cumulative) {
  std::vector<double> out;
  double prev = 0.0;
  for (const auto& cp : rec.checkpoints) {
    const double c = cumulative(cp);
    out.push_back(c - prev);
    prev = c;
  }
  return out;
}

double sample_sd(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

TEST(Bounds, ReferenceConstants) {
  const auto cfg = reference_config();
  const auto b = theoretical_bounds(cfg);
  // Four EFSs with b = 8, alpha = 1, M = 16: 4 * (64 + 256) / 2.
  EXPECT_EQ(b.B, 640.0);
  // Catalog size 75, K = 5 per EFS: 2 * 4 * 5 * sqrt(6 * 16 * 75).
  EXPECT_NEAR(b.Gamma, 40.0 * std::sqrt(7200.0), 1e-9);
  EXPECT_EQ(b.sum_users_capacity, 4.0 * 5.0 * 16.0);
  EXPECT_EQ(b.queue_numerator(50.0), 640.0 + 50.0 * 2.0 * 320.0);
}

TEST(Bounds, LimitsAndScaling) {
  const auto b = theoretical_bounds(reference_config());
  const std::uint64_t T = 200000;
  const double tail = 4.0 * b.sum_users_capacity / static_cast<double>(T);
  // Unlimited history removes the learning term (Gamma sqrt(ln T / 2^62) is about 6e-6).
  EXPECT_NEAR(b.bound(T, 50.0, std::uint64_t{1} << 62), 640.0 / 50.0 + tail, 1e-5);
  // Doubling V halves the first term only.
  const double learn = b.Gamma * std::sqrt(std::log(static_cast<double>(T)) / static_cast<double>(T + 1000));
  EXPECT_NEAR(b.bound(T, 50.0, 1000), 640.0 / 50.0 + tail + learn, 1e-9);
  EXPECT_NEAR(b.bound(T, 25.0, 1000) - b.bound(T, 50.0, 1000), 640.0 / 50.0, 1e-9);
  // More history never loosens the bound.
  EXPECT_LT(b.bound(T, 50.0, 5000), b.bound(T, 50.0, 1000));
}

TEST(RunSimulation, ZeroHorizonIsRejected) {
  auto cfg = reference_config();
  cfg.horizon = 0;
  EXPECT_THROW(run_simulation(cfg), std::invalid_argument);
}

TEST(RunSimulation, NoopRegretEqualsRStarForAnySeed) {
  auto cfg = quick_reference(500);
  cfg.policy = parse_policy_label("noop");
  const auto a = summarize(run_simulation(cfg));
  cfg.seeds.demand = 999;
  const auto b = summarize(run_simulation(cfg));
  EXPECT_EQ(a.regret_expected, a.r_star);
  EXPECT_EQ(a.regret_realized, a.r_star);
  EXPECT_EQ(b.regret_expected, a.regret_expected);
  EXPECT_EQ(a.total_cost_avg, 0.0);
  EXPECT_EQ(a.queue_avg_total, 0.0);
}

TEST(RunSimulation, OracleMixtureHasNearZeroRegret) {
  auto cfg = quick_reference(20000);
  cfg.policy = parse_policy_label("oracle");
  RunOptions opts;
  opts.checkpoint_stride = 1;
  const auto rec = run_simulation(cfg, opts);
  const auto per_slot = increments(rec, [](const Checkpoint& c) { return c.expected_reward; });
  const double se = sample_sd(per_slot) / std::sqrt(static_cast<double>(per_slot.size()));
  const auto s = summarize(rec);
  EXPECT_LT(std::abs(s.regret_expected), 4.0 * se) << "se " << se;
  // The mixture meets every budget on average.
  for (std::size_t n = 0; n < cfg.num_efs; ++n) EXPECT_LT(s.cost_avg[n], cfg.budget[n] + 4.0 * 8.0 / std::sqrt(2e4));
}

TEST(RunSimulation, RealizedAndExpectedRewardsAgreeWithinNoise) {
  const auto cfg = quick_reference(100000);
  RunOptions opts;
  opts.checkpoint_stride = 1;
  const auto rec = run_simulation(cfg, opts);
  const auto diff = increments(rec, [](const Checkpoint& c) { return c.reward - c.expected_reward; });
  const double se = sample_sd(diff) / std::sqrt(static_cast<double>(diff.size()));
  const auto s = summarize(rec);
  EXPECT_LT(std::abs(s.regret_realized - s.regret_expected), 3.0 * se) << "se " << se;
}

TEST(RunSimulation, QueueSeriesFollowsTheUpdateRule) {
  const auto cfg = quick_reference(3000);
  RunOptions opts;
  opts.checkpoint_stride = 1;
  const auto rec = run_simulation(cfg, opts);
  ASSERT_EQ(rec.checkpoints.size(), cfg.horizon);
  std::vector<double> q(cfg.num_efs, 0.0);
  std::vector<double> prev_cost(cfg.num_efs, 0.0);
  double queue_total = 0.0;
  for (const auto& cp : rec.checkpoints) {
    for (std::size_t n = 0; n < cfg.num_efs; ++n) queue_total += q[n];
    for (std::size_t n = 0; n < cfg.num_efs; ++n) {
      const double c = cp.cost[n] - prev_cost[n];
      prev_cost[n] = cp.cost[n];
      q[n] = std::max(q[n] - cfg.budget[n], 0.0) + c;
      ASSERT_NEAR(cp.queue[n], q[n], 1e-9) << "slot " << cp.slot;
    }
    ASSERT_NEAR(cp.queue_total, queue_total, 1e-9 * std::max(1.0, queue_total));
  }
}

TEST(RunSimulation, CheckpointStrideDoesNotChangeTheRun) {
  const auto cfg = quick_reference(2500);
  RunOptions fine;
  fine.checkpoint_stride = 1;
  RunOptions coarse;
  coarse.checkpoint_stride = 1000;
  const auto a = run_simulation(cfg, fine);
  const auto b = run_simulation(cfg, coarse);
  ASSERT_EQ(b.checkpoints.size(), 3U);
  EXPECT_EQ(b.checkpoints[0].slot, 1000U);
  EXPECT_EQ(b.checkpoints[2].slot, 2500U);
  EXPECT_EQ(a.terminal().reward, b.terminal().reward);
  EXPECT_EQ(a.terminal().expected_reward, b.terminal().expected_reward);
  EXPECT_EQ(a.terminal().cost, b.terminal().cost);
  EXPECT_EQ(a.terminal().queue_total, b.terminal().queue_total);
  EXPECT_EQ(a.checkpoints[999].reward, b.checkpoints[0].reward);
}

TEST(RunSimulation, SummaryAveragesMatchTerminalCheckpoint) {
  const auto cfg = quick_reference(4000);
  const auto rec = run_simulation(cfg);
  const auto s = summarize(rec);
  const auto& cp = rec.terminal();
  const double T = 4000.0;
  EXPECT_NEAR(s.reward_avg, cp.reward / T, 1e-9);
  EXPECT_NEAR(s.expected_reward_avg, cp.expected_reward / T, 1e-9);
  double total = 0.0;
  for (std::size_t n = 0; n < cfg.num_efs; ++n) {
    EXPECT_NEAR(s.cost_avg[n], cp.cost[n] / T, 1e-9);
    total += cp.cost[n] / T;
  }
  EXPECT_NEAR(s.total_cost_avg, total, 1e-9);
  EXPECT_NEAR(s.queue_avg_total, cp.queue_total / T, 1e-9);
  EXPECT_NEAR(s.regret_expected, s.r_star - s.expected_reward_avg, 1e-9);
  EXPECT_NEAR(s.regret_realized, s.r_star - s.reward_avg, 1e-9);
  EXPECT_EQ(s.h_min, 1000U);
  EXPECT_EQ(s.config_hash, config_hash(cfg));
}

TEST(RunSimulation, SameSeedsGiveByteIdenticalCsv) {
  const auto cfg = quick_reference(3000);
  EXPECT_EQ(timeseries_csv(run_simulation(cfg)), timeseries_csv(run_simulation(cfg)));
  auto other = cfg;
  other.seeds.demand += 1;
  EXPECT_NE(timeseries_csv(run_simulation(cfg)), timeseries_csv(run_simulation(other)));
}

TEST(RunSimulation, ReplayedTraceReproducesTheRun) {
  const auto cfg = quick_reference(1500);
  DemandTrace trace(cfg.num_efs, cfg.num_files());
  RunOptions rec_opts;
  rec_opts.record_trace = &trace;
  const auto original = run_simulation(cfg, rec_opts);
  ASSERT_EQ(trace.size(), 1500U);
  RunOptions replay_opts;
  replay_opts.replay = &trace;
  // A different demand seed must not matter when replaying.
  auto shifted = cfg;
  shifted.seeds.demand = 4242;
  const auto replayed = run_simulation(shifted, replay_opts);
  EXPECT_EQ(original.terminal().expected_reward, replayed.terminal().expected_reward);
  EXPECT_EQ(original.terminal().reward, replayed.terminal().reward);
  EXPECT_EQ(original.terminal().cost, replayed.terminal().cost);
}

TEST(Csv, TimeseriesHeaderAndValuesRoundTrip) {
  const auto cfg = quick_reference(2000);
  RunOptions opts;
  opts.checkpoint_stride = 500;
  const auto rec = run_simulation(cfg, opts);
  const auto lines = lines_of(timeseries_csv(rec));
  ASSERT_EQ(lines.size(), 5U);
  EXPECT_EQ(lines[0],
            "schema_version,slot,total_reward_avg,expected_reward_avg,regret_expected,regret_realized,"
            "cost_avg_efs_1,cost_avg_efs_2,cost_avg_efs_3,cost_avg_efs_4,queue_1,queue_2,queue_3,queue_4,"
            "queue_avg_total,bound");
  const auto regret = compute_regret(rec, rec.r_star.total);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = csv::split(lines[i]);
    ASSERT_EQ(cells.size(), 16U);
    const auto& cp = rec.checkpoints[i - 1];
    EXPECT_EQ(cells[0], "1");
    EXPECT_EQ(csv::parse_u64(cells[1]), cp.slot);
    EXPECT_EQ(csv::parse_double(cells[2]), cp.reward_avg());
    EXPECT_EQ(csv::parse_double(cells[3]), cp.expected_reward_avg());
    EXPECT_EQ(csv::parse_double(cells[4]), regret.expected[i - 1]);
    EXPECT_EQ(csv::parse_double(cells[5]), regret.realized[i - 1]);
    for (std::size_t n = 0; n < 4; ++n) {
      EXPECT_EQ(csv::parse_double(cells[6 + n]), cp.cost_avg(n));
      EXPECT_EQ(csv::parse_double(cells[10 + n]), cp.queue[n]);
    }
    EXPECT_EQ(csv::parse_double(cells[14]), cp.queue_avg_total());
    EXPECT_EQ(csv::parse_double(cells[15]), rec.bounds.bound(cp.slot, rec.v, rec.h_min));
  }
}

TEST(Csv, SummaryHeaderHasPerEfsColumnsEvenWhenEmpty) {
  const auto lines = lines_of(summary_csv({}, 3));
  ASSERT_EQ(lines.size(), 1U);
  const auto cells = csv::split(lines[0]);
  EXPECT_EQ(cells.front(), "schema_version");
  EXPECT_EQ(cells.back(), "bound");
  EXPECT_NE(lines[0].find("cost_avg_efs_3,bound_B"), std::string::npos);
}

TEST(Csv, MatchesGoldenFile) {
  const auto cfg = cphbl::testing::small_config(2, 3, 6, 8, 4.0, 300, 20);
  RunOptions opts;
  opts.checkpoint_stride = 50;
  const auto text = timeseries_csv(run_simulation(cfg, opts));
  const std::filesystem::path golden = std::filesystem::path(CPHBL_GOLDEN_DIR) / "small_timeseries.csv";
  if (std::getenv("CPHBL_UPDATE_GOLDEN") != nullptr) {
    csv::write_file(golden, text);
    GTEST_SKIP() << "golden file rewritten";
  }
  std::ifstream in(golden, std::ios::binary);
  ASSERT_TRUE(in) << "missing " << golden;
  std::stringstream expected;
  expected << in.rdbuf();
  EXPECT_EQ(text, expected.str());
}

TEST(Sweep, EmptyValueListGivesNoRows) {
  SweepOptions opts;
  const std::vector<std::string> none;
  const auto res = sweep(quick_reference(100), SweepAxis::v, none, opts);
  EXPECT_TRUE(res.rows.empty());
}

TEST(Sweep, ParallelAndSerialRowsAreIdentical) {
  const auto tmpl = quick_reference(1500);
  const std::vector<std::string> values = {"10", "30", "50"};
  SweepOptions serial;
  serial.seeds = 2;
  SweepOptions parallel = serial;
  parallel.jobs = 3;
  const auto a = sweep(tmpl, SweepAxis::v, values, serial);
  const auto b = sweep(tmpl, SweepAxis::v, values, parallel);
  ASSERT_EQ(a.rows.size(), 6U);
  EXPECT_EQ(summary_csv(a.rows, 4), summary_csv(b.rows, 4));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].value, values[i / 2]);
    EXPECT_EQ(a.rows[i].replicate, i % 2);
    EXPECT_EQ(a.rows[i].axis, "V");
  }
  // Replicates are paired across values.
  EXPECT_EQ(a.rows[0].seeds, a.rows[2].seeds);
  EXPECT_NE(a.rows[0].seeds, a.rows[1].seeds);
}

TEST(Sweep, KeepRecordsAndCallback) {
  SweepOptions opts;
  opts.keep_records = true;
  int calls = 0;
  opts.on_run = [&](const RunSummary&) { ++calls; };
  const std::vector<std::string> values = {"lfu", "cphbl-ucbt"};
  const auto res = sweep(quick_reference(200), SweepAxis::policy, values, opts);
  EXPECT_EQ(calls, 2);
  ASSERT_EQ(res.records.size(), 2U);
  EXPECT_EQ(res.records[0].policy, "lfu");
  EXPECT_EQ(res.rows[1].policy, "cphbl-ucbt");
}

TEST(ApplyAxis, ParsesEveryAxis) {
  const auto cfg = quick_reference(1000);
  EXPECT_EQ(apply_axis(cfg, SweepAxis::v, "25").v_param, 25.0);
  EXPECT_EQ(apply_axis(cfg, SweepAxis::horizon, "5000").horizon, 5000U);
  EXPECT_EQ(apply_axis(cfg, SweepAxis::history, "0").min_history(), 0U);
  EXPECT_EQ(apply_axis(cfg, SweepAxis::history, "0.5T").min_history(), 500U);
  EXPECT_EQ(apply_axis(cfg, SweepAxis::history, "T").min_history(), 1000U);
  EXPECT_EQ(apply_axis(cfg, SweepAxis::history, "TlogT").min_history(), 6908U);  // 1000 ln 1000 = 6907.76
  EXPECT_EQ(apply_axis(cfg, SweepAxis::budget, "4").budget, std::vector<double>(4, 4.0));
  EXPECT_EQ(apply_axis(cfg, SweepAxis::policy, "cphbl-greedy:0.1").policy,
            (PolicySpec{PolicyKind::cphbl, Estimator::greedy, 0.1}));
  EXPECT_EQ(parse_sweep_axis("H_min"), SweepAxis::history);
  EXPECT_EQ(parse_sweep_axis("b"), SweepAxis::budget);
}

TEST(ApplyAxis, RejectsBadValues) {
  const auto cfg = quick_reference(1000);
  EXPECT_THROW(apply_axis(cfg, SweepAxis::v, "fast"), ConfigError);
  EXPECT_THROW(apply_axis(cfg, SweepAxis::v, "-1"), ConfigError);
  EXPECT_THROW(apply_axis(cfg, SweepAxis::horizon, "2.5"), ConfigError);
  EXPECT_THROW(apply_axis(cfg, SweepAxis::history, "1.5"), ConfigError);
  EXPECT_THROW(apply_axis(cfg, SweepAxis::policy, "cphbl-greedy0.1"), ConfigError);
  EXPECT_THROW(parse_sweep_axis("alpha"), ConfigError);
}
