#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "cphbl/demand.hpp"
#include "cphbl/errors.hpp"
#include "reference.hpp"

using namespace cphbl;
using boost::multiprecision::cpp_dec_float_50;

namespace {

PopularityModel uniform_model(std::size_t users, std::size_t files) {
  std::vector<std::vector<double>> pmfs(users, std::vector<double>(files, 1.0 / static_cast<double>(files)));
  return PopularityModel(std::move(pmfs), std::vector<std::size_t>(users, 0), 1);
}

}  // namespace

TEST(Zipf, ZeroSkewIsUniform) {
  const auto p = zipf_pmf(0.0, 4);
  for (double x : p) EXPECT_EQ(x, 0.25);
}

TEST(Zipf, UnitSkewMatchesExactRationals) {
  // 1 + 1/2 + 1/3 + 1/4 = 25/12, so p = [12, 6, 4, 3] / 25.
  const auto p = zipf_pmf(1.0, 4);
  const double expected[] = {12.0 / 25.0, 6.0 / 25.0, 4.0 / 25.0, 3.0 / 25.0};
  for (std::size_t f = 0; f < 4; ++f) EXPECT_NEAR(p[f], expected[f], 1e-15);
}

TEST(Zipf, MatchesFiftyDigitEvaluation) {
  for (double skew : {0.56, 0.8, 1.2}) {
    const std::size_t F = 20;
    const auto p = zipf_pmf(skew, F);
    const cpp_dec_float_50 s(skew);
    cpp_dec_float_50 total = 0;
    std::vector<cpp_dec_float_50> w(F);
    for (std::size_t f = 0; f < F; ++f) {
      w[f] = boost::multiprecision::pow(cpp_dec_float_50(f + 1), -s);
      total += w[f];
    }
    double sum = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      EXPECT_NEAR(p[f], static_cast<double>(w[f] / total), 1e-12) << "skew " << skew << " file " << f;
      sum += p[f];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (std::size_t f = 1; f < F; ++f) EXPECT_LT(p[f], p[f - 1]);
  }
}

TEST(Zipf, RejectsEmptyCatalogAndNegativeSkew) {
  EXPECT_THROW(zipf_pmf(1.0, 0), std::domain_error);
  EXPECT_THROW(zipf_pmf(-0.1, 3), std::domain_error);
}

TEST(PopularityModel, MeansAggregateUsersOfEachEfs) {
  const auto cfg = reference_config();
  const auto model = PopularityModel::from_config(cfg);
  for (std::size_t n = 0; n < cfg.num_efs; ++n) {
    double row_total = 0.0;
    for (std::size_t f = 0; f < cfg.num_files(); ++f) {
      double expected = 0.0;
      for (auto k : cfg.efs_users[n]) expected += zipf_pmf(cfg.zipf_skew[k], cfg.num_files())[f];
      EXPECT_NEAR(model.mean(n, f), expected, 1e-12);
      EXPECT_GE(model.mean(n, f), 0.0);
      EXPECT_LE(model.mean(n, f), static_cast<double>(cfg.users_at(n)));
      row_total += model.mean(n, f);
    }
    EXPECT_NEAR(row_total, static_cast<double>(cfg.users_at(n)), 1e-12);
  }
}

TEST(SampleDemands, DegeneratePmfAlwaysRequestsFirstFile) {
  PopularityModel model({{1.0, 0.0, 0.0}}, {0}, 1);
  RngStream rng(7, StreamTag::demand);
  for (int t = 0; t < 1000; ++t) {
    const auto d = sample_slot_demands(model, rng);
    EXPECT_EQ(d.at(0, 0), 1U);
    EXPECT_EQ(d.at(0, 1), 0U);
    EXPECT_EQ(d.at(0, 2), 0U);
  }
}

TEST(SampleDemands, EmpiricalMeanWithinThreeStandardErrors) {
  const std::size_t K = 20;
  const std::size_t F = 4;
  const auto model = uniform_model(K, F);
  RngStream rng(11, StreamTag::demand);
  const int slots = 100000;
  std::vector<double> sums(F, 0.0);
  DemandMatrix d(1, F, K);
  for (int t = 0; t < slots; ++t) {
    sample_slot_demands(model, rng, d);
    for (std::size_t f = 0; f < F; ++f) sums[f] += d.at(0, f);
  }
  const double p = 1.0 / F;
  const double mean = static_cast<double>(K) * p;
  const double se = std::sqrt(static_cast<double>(K) * p * (1.0 - p) / slots);
  for (std::size_t f = 0; f < F; ++f) EXPECT_NEAR(sums[f] / slots, mean, 3.0 * se) << "file " << f;
}

TEST(SampleDemands, RowSumsEqualUsersPerEfs) {
  const auto cfg = reference_config();
  const auto model = PopularityModel::from_config(cfg);
  RngStream rng(3, StreamTag::demand);
  for (int t = 0; t < 500; ++t) {
    const auto d = sample_slot_demands(model, rng);
    for (std::size_t n = 0; n < cfg.num_efs; ++n) {
      std::uint32_t total = 0;
      for (std::size_t f = 0; f < cfg.num_files(); ++f) {
        EXPECT_LE(d.at(n, f), cfg.users_at(n));
        total += d.at(n, f);
      }
      EXPECT_EQ(total, cfg.users_at(n));
    }
    for (std::size_t k = 0; k < cfg.num_users; ++k) EXPECT_LT(d.requests[k], cfg.num_files());
  }
}

TEST(SampleDemands, RowDependsOnlyOnItsOwnUsers) {
  // Changing the pmf of an EFS-1 user must leave EFS 0's row untouched,
  // because each user consumes exactly one draw in a fixed order.
  std::vector<std::vector<double>> a = {{0.5, 0.5}, {0.5, 0.5}, {0.2, 0.8}};
  std::vector<std::vector<double>> b = a;
  b[1] = {0.9, 0.1};
  PopularityModel ma(a, {0, 1, 0}, 2);
  PopularityModel mb(b, {0, 1, 0}, 2);
  RngStream ra(5);
  RngStream rb(5);
  for (int t = 0; t < 2000; ++t) {
    const auto da = sample_slot_demands(ma, ra);
    const auto db = sample_slot_demands(mb, rb);
    EXPECT_EQ(da.at(0, 0), db.at(0, 0));
    EXPECT_EQ(da.at(0, 1), db.at(0, 1));
  }
}

TEST(History, ZeroCountsGiveZeroSums) {
  const auto cfg = reference_config();
  const auto model = PopularityModel::from_config(cfg);
  RngStream rng(1, StreamTag::history);
  const auto h = generate_history(model, std::vector<std::vector<std::uint64_t>>(4, std::vector<std::uint64_t>(20, 0)),
                                  rng);
  for (auto s : h.sums) EXPECT_EQ(s, 0U);
  for (auto c : h.counts) EXPECT_EQ(c, 0U);
  EXPECT_EQ(h.min_count(), 0U);
}

TEST(History, SampleMeanWithinThreeStandardErrors) {
  const std::size_t K = 20;
  const std::size_t F = 5;
  const auto model = uniform_model(K, F);
  RngStream rng(21, StreamTag::history);
  const std::uint64_t H = 1000;
  const auto h = generate_history(model, {std::vector<std::uint64_t>(F, H)}, rng);
  const double p = 1.0 / F;
  const double se = std::sqrt(static_cast<double>(K) * p * (1.0 - p) / static_cast<double>(H));
  for (std::size_t f = 0; f < F; ++f) {
    EXPECT_EQ(h.count(0, f), H);
    EXPECT_LE(h.sum(0, f), H * K);
    EXPECT_NEAR(static_cast<double>(h.sum(0, f)) / H, K * p, 3.0 * se);
  }
}

TEST(History, IdenticalSeedsGiveIdenticalSets) {
  const auto cfg = reference_config();
  const auto model = PopularityModel::from_config(cfg);
  RngStream a(9, StreamTag::history);
  RngStream b(9, StreamTag::history);
  EXPECT_EQ(generate_history(model, cfg.history_counts, a), generate_history(model, cfg.history_counts, b));
}

TEST(History, HistorySeedNeverChangesDemandTrace) {
  const auto cfg = reference_config();
  const auto model = PopularityModel::from_config(cfg);
  auto trace_with_history_seed = [&](std::uint64_t history_seed) {
    RngStream hist(history_seed, StreamTag::history);
    (void)generate_history(model, cfg.history_counts, hist);
    RngStream demand(cfg.seeds.demand, StreamTag::demand);
    std::vector<std::uint32_t> all;
    for (int t = 0; t < 200; ++t) {
      const auto d = sample_slot_demands(model, demand);
      all.insert(all.end(), d.counts.begin(), d.counts.end());
    }
    return all;
  };
  EXPECT_EQ(trace_with_history_seed(1), trace_with_history_seed(12345));
}

TEST(DemandTrace, CsvRoundTripAndReplayReproduceCounts) {
  const auto cfg = cphbl::testing::small_config(2, 3, 6, 8, 4.0, 50, 0);
  const auto model = PopularityModel::from_config(cfg);
  GeneratedDemand gen(model, RngStream(4, StreamTag::demand));
  DemandTrace trace(cfg.num_efs, cfg.num_files());
  std::vector<DemandMatrix> drawn;
  for (std::uint64_t t = 0; t < 50; ++t) {
    DemandMatrix d(cfg.num_efs, cfg.num_files(), cfg.num_users);
    gen.next(t, d);
    trace.append(d);
    drawn.push_back(d);
  }
  const auto path = std::filesystem::temp_directory_path() / "cphbl_trace_test" / "trace.csv";
  trace.write_csv(path);
  const auto back = DemandTrace::read_csv(path, cfg.num_efs, cfg.num_files(), 50);
  ASSERT_EQ(back.size(), 50U);
  ReplayDemand replay(back, cfg.efs_users);
  for (std::uint64_t t = 0; t < 50; ++t) {
    EXPECT_EQ(back.slot_counts(t), drawn[t].counts);
    DemandMatrix d(cfg.num_efs, cfg.num_files(), cfg.num_users);
    replay.next(t, d);
    EXPECT_EQ(d.counts, drawn[t].counts);
    // Reconstructed requests aggregate back to the same counts.
    std::vector<std::uint32_t> agg(d.counts.size(), 0);
    const auto owner = cfg.user_to_efs();
    for (std::size_t k = 0; k < cfg.num_users; ++k) ++agg[owner[k] * cfg.num_files() + d.requests[k]];
    EXPECT_EQ(agg, d.counts);
  }
  DemandMatrix d(cfg.num_efs, cfg.num_files(), cfg.num_users);
  EXPECT_THROW(replay.next(50, d), IoError);
  std::filesystem::remove_all(path.parent_path());
}
