#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "redbench/error.hpp"
#include "redbench/fidelity.hpp"
#include "test_support.hpp"

namespace redbench {
namespace {

using testing::at;
using testing::make_pool;
using testing::oracle_repetition_rate;
using testing::record;

UserTrace random_trace(std::mt19937_64& rng, std::size_t n, std::size_t alphabet) {
  std::vector<QueryRecord> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = rng() % alphabet;
    std::vector<std::string> tables{"a"};
    for (std::size_t k = 0; k <= h % 3; ++k) tables.push_back("t" + std::to_string(h % 5 + k));
    rows.push_back(record("u", "q" + std::to_string(1000 + i),
                          at(2024, 3, 4, 9) + std::chrono::seconds(i), tables,
                          "fp" + std::to_string(h)));
  }
  return group_by_user(rows).at(0);
}

TEST(BuildReport, ZeroFallbackPreservesInstanceRate) {
  std::mt19937_64 rng(83);
  std::vector<testing::TemplateSpec> specs;
  for (std::uint32_t j = 1; j <= 3; ++j) {
    for (int t = 0; t < 20; ++t) specs.push_back({std::to_string(j * 100 + t), j, 100});
  }
  const auto pool = make_pool(specs);
  for (int trial = 0; trial < 100; ++trial) {
    const auto trace = random_trace(rng, 1 + rng() % 80, 1 + rng() % 30);
    const auto w = generate_workload(trace, pool, rng());
    const auto r = build_report(trace, w, pool);
    const auto in = oracle_repetition_rate(trace.hashes());
    std::vector<std::string> instances;
    for (const auto& q : w.queries) instances.push_back(q.instance_id);
    ASSERT_EQ(r.fallback_count, 0u);
    EXPECT_EQ(r.input_rate, in);
    EXPECT_EQ(r.output_rate_by_hash, in);
    EXPECT_EQ(r.output_rate_by_instance, oracle_repetition_rate(instances));
    EXPECT_EQ(r.output_rate_by_instance, r.input_rate);
  }
}

TEST(BuildReport, HashRateAlwaysEqualsInputAndInstanceRateNeverBelow) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pool = make_pool({{"1", 1, 1 + rng() % 3}, {"2", static_cast<std::uint32_t>(2 + rng() % 2), 1 + rng() % 3}});
    const auto trace = random_trace(rng, 1 + rng() % 60, 1 + rng() % 25);
    const auto w = generate_workload(trace, pool, rng());
    const auto r = build_report(trace, w, pool);
    EXPECT_EQ(r.output_rate_by_hash, r.input_rate);
    EXPECT_GE(r.output_rate_by_instance, r.output_rate_by_hash);
    EXPECT_EQ(r.length, trace.records.size());
    EXPECT_DOUBLE_EQ(r.fallback_fraction, w.fallback_fraction());
  }
}

TEST(BuildReport, SingleRepeatedQuery) {
  const auto pool = make_pool({{"1", 1, 1}, {"2", 2, 1}});
  std::vector<QueryRecord> rows;
  for (int i = 0; i < 8; ++i) {
    rows.push_back(record("u", "q" + std::to_string(i), at(2024, 3, 4, 9, i), {"a", "b"}));
  }
  const auto trace = group_by_user(rows).at(0);
  const auto r = build_report(trace, generate_workload(trace, pool, 0), pool);
  EXPECT_EQ(r.fallback_fraction, 0.0);
  EXPECT_DOUBLE_EQ(r.input_rate, 7.0 / 8.0);
  EXPECT_DOUBLE_EQ(r.output_rate_by_instance, 7.0 / 8.0);
}

TEST(BuildReport, JoinSeriesUseUserAndPoolRanges) {
  const auto pool = make_pool({{"low", 1, 3}, {"high", 5, 3}});
  const auto trace =
      group_by_user({record("u", "q1", at(2024, 3, 4, 9), {"a", "b"}, "x"),
                     record("u", "q2", at(2024, 3, 4, 10), {"a", "b", "c", "d"}, "y"),
                     record("u", "q3", at(2024, 3, 4, 11), {"a", "c"}, "z")})
          .at(0);
  const auto r = build_report(trace, generate_workload(trace, pool, 0), pool);
  ASSERT_EQ(r.input_join_series.size(), 3u);
  EXPECT_EQ(r.input_join_series[0].normalized_join, 0.0);
  EXPECT_EQ(r.input_join_series[1].normalized_join, 1.0);
  EXPECT_EQ(r.output_join_series[0].normalized_join, 0.0);
  EXPECT_EQ(r.output_join_series[1].normalized_join, 1.0);
  EXPECT_EQ(r.distinct_scansets_in, 3u);
  EXPECT_EQ(r.user_table_count, 4u);
}

TEST(BuildReport, ShapeArgExtremaMatchWithSingletonClosestSets) {
  // Pool norms 0, 1/3, 2/3, 1 and user joins 1..4 give singleton closest sets.
  const auto pool = make_pool({{"j1", 1, 50}, {"j2", 2, 50}, {"j3", 3, 50}, {"j4", 4, 50}});
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<QueryRecord> rows;
    const auto n = 2 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> tables;
      const auto joins = i == 0 ? 0 : (i == 1 ? 3 : rng() % 4);
      for (std::size_t k = 0; k <= joins; ++k) tables.push_back("t" + std::to_string(k));
      rows.push_back(record("u", "q" + std::to_string(100 + i),
                            at(2024, 3, 4, 9) + std::chrono::seconds(i), tables,
                            "fp" + std::to_string(i)));
    }
    const auto trace = group_by_user(rows).at(0);
    const auto r = build_report(trace, generate_workload(trace, pool, rng()), pool);
    auto values = [](const std::vector<SeriesPoint>& s) {
      std::vector<double> v;
      for (const auto& p : s) v.push_back(p.normalized_join);
      return v;
    };
    const auto in = minmax_rescale(values(r.input_join_series));
    const auto out = minmax_rescale(values(r.output_join_series));
    EXPECT_EQ(std::min_element(in.begin(), in.end()) - in.begin(),
              std::min_element(out.begin(), out.end()) - out.begin());
    EXPECT_EQ(std::max_element(in.begin(), in.end()) - in.begin(),
              std::max_element(out.begin(), out.end()) - out.begin());
    EXPECT_EQ(in, out);
  }
}

TEST(BuildReport, MismatchedWorkloadIsAnError) {
  const auto pool = make_pool({{"1", 1, 2}, {"2", 2, 2}});
  const auto trace = group_by_user({record("u", "q1", at(2024, 3, 4, 9), {"a", "b"}),
                                    record("u", "q2", at(2024, 3, 4, 10), {"a", "b", "c"})})
                         .at(0);
  auto w = generate_workload(trace, pool, 0);
  auto shorter = w;
  shorter.queries.pop_back();
  EXPECT_THROW(build_report(trace, shorter, pool), Error);
  auto renamed = w;
  renamed.queries[0].source_query_id = "other";
  EXPECT_THROW(build_report(trace, renamed, pool), Error);
}

FidelityReport report(int bucket, std::size_t length, std::size_t fallbacks, double rate) {
  FidelityReport r;
  r.bucket = bucket;
  r.length = length;
  r.fallback_count = fallbacks;
  r.fallback_fraction = static_cast<double>(fallbacks) / static_cast<double>(length);
  r.input_rate = r.output_rate_by_hash = r.output_rate_by_instance = rate;
  return r;
}

TEST(Aggregate, Examples) {
  const std::vector one{report(3, 10, 2, 0.3)};
  const auto s1 = aggregate_reports(one);
  EXPECT_EQ(s1.workloads, 1u);
  EXPECT_DOUBLE_EQ(s1.overall_fallback_fraction, 0.2);
  EXPECT_DOUBLE_EQ(s1.buckets.at(3).mean_input_rate, 0.3);
  EXPECT_DOUBLE_EQ(s1.buckets.at(3).mean_fallback_fraction, 0.2);

  const std::vector two{report(1, 10, 0, 0.1), report(5, 10, 5, 0.5)};
  EXPECT_DOUBLE_EQ(aggregate_reports(two).overall_fallback_fraction, 0.25);

  const auto empty = aggregate_reports(std::vector<FidelityReport>{});
  EXPECT_EQ(empty.workloads, 0u);
  EXPECT_TRUE(empty.buckets.empty());
  EXPECT_EQ(empty.overall_fallback_fraction, 0.0);
}

TEST(Aggregate, OverallFractionIsLengthWeighted) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FidelityReport> rs;
    std::size_t total = 0, fb = 0;
    for (auto n = 1 + rng() % 10; n > 0; --n) {
      const auto len = 1 + rng() % 50;
      const auto f = rng() % (len + 1);
      total += len;
      fb += f;
      rs.push_back(report(static_cast<int>(rng() % 10), len, f, 0.0));
    }
    const auto s = aggregate_reports(rs);
    EXPECT_DOUBLE_EQ(s.overall_fallback_fraction,
                     static_cast<double>(fb) / static_cast<double>(total));
    EXPECT_EQ(s.queries, total);
  }
}

TEST(TableCoverage, CountsUsersBeyondPoolTables) {
  const auto pool = make_pool({{"1", 1, 1}});  // 2 tables
  const auto traces = group_by_user({record("a", "1", at(2024, 3, 4, 9), {"x", "y"}),
                                     record("b", "2", at(2024, 3, 4, 9), {"x", "y", "z"}),
                                     record("c", "3", at(2024, 3, 4, 9), {"p", "q"}),
                                     record("c", "4", at(2024, 3, 4, 9), {"r", "s"})});
  EXPECT_DOUBLE_EQ(table_coverage_shortfall(traces, pool), 2.0 / 3.0);
  EXPECT_EQ(table_coverage_shortfall(std::vector<UserTrace>{}, pool), 0.0);
}

TEST(MinmaxRescale, FlatAndRegular) {
  EXPECT_EQ(minmax_rescale(std::vector{2.0, 4.0, 3.0}), (std::vector{0.0, 1.0, 0.5}));
  EXPECT_EQ(minmax_rescale(std::vector{7.0, 7.0}), (std::vector{0.5, 0.5}));
  EXPECT_TRUE(minmax_rescale(std::vector<double>{}).empty());
}

TEST(Artifacts, CsvShapes) {
  const auto pool = make_pool({{"1", 1, 2}, {"2", 2, 2}});
  const auto trace = group_by_user({record("u", "q1", at(2024, 3, 4, 9), {"a", "b"}),
                                    record("u", "q2", at(2024, 3, 4, 10), {"a", "b", "c"})})
                         .at(0);
  const auto r = build_report(trace, generate_workload(trace, pool, 0), pool);
  std::ostringstream series;
  write_series_csv(series, r);
  EXPECT_EQ(series.str(), "seq,input_norm_joins,output_norm_joins\n0,0.000000,0.000000\n1,1.000000,1.000000\n");

  std::ostringstream csv;
  write_fidelity_csv(csv, std::vector{r, r});
  std::istringstream lines(csv.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 3u);
}

}  // namespace
}  // namespace redbench
