#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "redbench/error.hpp"
#include "redbench/trace_model.hpp"
#include "test_support.hpp"

namespace redbench {
namespace {

using testing::at;
using testing::oracle_repetition_rate;
using testing::record;

const std::string kHeader = std::string(kTraceHeader) + "\n";

QueryHash hash(std::vector<std::string> tables, std::uint32_t joins, std::uint32_t scans,
               std::string fp) {
  return QueryHash{Scanset(std::move(tables)), joins, scans, std::move(fp)};
}

TEST(Timestamp, RoundTripsIsoFormat) {
  const auto ts = parse_timestamp("2024-03-04T08:00:59Z");
  EXPECT_EQ(ts, at(2024, 3, 4, 8, 0, 59));
  EXPECT_EQ(format_timestamp(ts), "2024-03-04T08:00:59Z");
}

TEST(Timestamp, RejectsMalformedText) {
  for (const char* bad : {"2024-03-04 08:00:00Z", "2024-02-30T08:00:00Z", "2024-03-04T24:00:00Z",
                          "2024-03-04T08:00:00", "yesterday", ""}) {
    EXPECT_THROW(parse_timestamp(bad), DomainError) << bad;
  }
}

TEST(Scanset, CanonicalisesOrderAndDuplicates) {
  EXPECT_EQ(Scanset::parse("7;3"), Scanset::parse("3;7"));
  EXPECT_EQ(Scanset::parse("b;a;b").to_string(), "a;b");
  EXPECT_TRUE(Scanset::parse("").empty());
}

TEST(HashOf, IsDeterministic) {
  auto r = record("u", "q1", at(2024, 1, 1), {"t1", "t2"}, "A");
  r.num_scans = 2;
  EXPECT_EQ(hash_of(r), hash_of(r));
  EXPECT_EQ(std::hash<QueryHash>{}(hash_of(r)), std::hash<QueryHash>{}(hash_of(r)));
}

TEST(HashOf, FingerprintDistinguishes) {
  auto a = record("u", "q1", at(2024, 1, 1), {"t1", "t2"}, "A");
  auto b = a;
  b.feature_fingerprint = "B";
  EXPECT_NE(hash_of(a), hash_of(b));
}

TEST(HashOf, AnyComponentDistinguishes) {
  const auto base = hash({"a", "b"}, 1, 2, "fp");
  EXPECT_NE(base, hash({"a", "c"}, 1, 2, "fp"));
  EXPECT_NE(base, hash({"a", "b"}, 2, 2, "fp"));
  EXPECT_NE(base, hash({"a", "b"}, 1, 3, "fp"));
  EXPECT_NE(base, hash({"a", "b"}, 1, 2, "fq"));
}

TEST(HashOf, TableOrderInCsvDoesNotMatter) {
  std::istringstream in(kHeader +
                        "u1,q1,2024-01-01T10:00:00Z,select,0,1,2,7;3,fp\n"
                        "u1,q2,2024-01-01T11:00:00Z,select,0,1,2,3;7,fp\n");
  const auto parsed = parse_trace(in);
  ASSERT_EQ(parsed.traces.size(), 1u);
  const auto& recs = parsed.traces[0].records;
  // Set-equality oracle on the raw id lists.
  const std::set<std::string> lhs{"7", "3"}, rhs{"3", "7"};
  ASSERT_EQ(lhs, rhs);
  EXPECT_EQ(hash_of(recs[0]), hash_of(recs[1]));
}

TEST(HashOf, PermutationsOfTablesHashEqual) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tables;
    const auto n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) tables.push_back("t" + std::to_string(rng() % 20));
    auto shuffled = tables;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto a = record("u", "q", at(2024, 1, 1), tables, "x");
    auto b = record("u", "q", at(2024, 1, 1), shuffled, "x");
    EXPECT_EQ(hash_of(a), hash_of(b));
  }
}

TEST(RepetitionRate, Examples) {
  const auto A = hash({"a", "b"}, 1, 2, "A");
  const auto B = hash({"a", "b"}, 1, 2, "B");
  const auto C = hash({"a", "c"}, 1, 2, "C");
  EXPECT_EQ(repetition_rate(std::vector<QueryHash>{}), 0.0);
  EXPECT_EQ(repetition_rate(std::vector{A}), 0.0);
  EXPECT_EQ(repetition_rate(std::vector{A, A, A, A}), 0.75);

  const std::vector seq{A, B, A, C, B, A};
  const double expected = oracle_repetition_rate(seq);
  ASSERT_EQ(expected, 0.5);
  EXPECT_EQ(repetition_rate(seq), expected);
}

TEST(RepetitionRate, MatchesSeenScanAndDistinctFormula) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = rng() % 60;
    const auto alphabet = 1 + rng() % 10;
    std::vector<QueryHash> seq;
    for (std::size_t i = 0; i < n; ++i) {
      seq.push_back(hash({"t"}, 0, 1, "fp" + std::to_string(rng() % alphabet)));
    }
    const double rate = repetition_rate(seq);
    EXPECT_DOUBLE_EQ(rate, oracle_repetition_rate(seq));
    if (!seq.empty()) {
      const std::set<QueryHash> distinct(seq.begin(), seq.end());
      EXPECT_DOUBLE_EQ(rate, 1.0 - static_cast<double>(distinct.size()) /
                                       static_cast<double>(seq.size()));
    }
    // Any reordering of the multiset keeps the rate.
    auto shuffled = seq;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_DOUBLE_EQ(repetition_rate(shuffled), rate);
  }
}

TEST(ParseTrace, GroupsByUser) {
  std::istringstream in(kHeader +
                        "u1,q1,2024-01-01T10:00:00Z,select,0,1,2,a;b,x\n"
                        "u2,q2,2024-01-01T10:00:00Z,select,0,1,2,a;b,x\n"
                        "u1,q3,2024-01-01T11:00:00Z,select,0,1,2,a;b,x\n"
                        "u2,q4,2024-01-01T12:00:00Z,insert,0,0,1,a,y\n"
                        "u1,q5,2024-01-01T12:00:00Z,select,1,1,2,a;b,x\n");
  const auto parsed = parse_trace(in);
  ASSERT_EQ(parsed.traces.size(), 2u);
  EXPECT_EQ(parsed.traces[0].user_id, "u1");
  EXPECT_EQ(parsed.traces[0].records.size(), 3u);
  EXPECT_EQ(parsed.traces[1].records.size(), 2u);
  EXPECT_EQ(parsed.traces[1].records[1].query_type, QueryType::insert);
  EXPECT_TRUE(parsed.traces[0].records[2].was_cached);
}

TEST(ParseTrace, HeaderOnlyIsEmpty) {
  std::istringstream in(kHeader);
  EXPECT_TRUE(parse_trace(in).traces.empty());
}

TEST(ParseTrace, SortsByTimestampThenQueryId) {
  std::mt19937_64 rng(3);
  std::vector<QueryRecord> rows;
  for (int i = 0; i < 200; ++i) {
    rows.push_back(record("u1", "q" + std::to_string(1000 + rng() % 100000),
                          at(2024, 1, 1) + std::chrono::seconds(rng() % 50), {"a", "b"}));
  }
  // Unique query ids.
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.query_id < b.query_id; });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.query_id == b.query_id; }),
             rows.end());
  std::shuffle(rows.begin(), rows.end(), rng);

  std::ostringstream out;
  write_trace(out, rows);
  std::istringstream in(out.str());
  const auto parsed = parse_trace(in);
  ASSERT_EQ(parsed.traces.size(), 1u);

  // Oracle: sort (iso-string, query_id) pairs lexicographically; fixed-width
  // ISO strings order chronologically.
  std::vector<std::pair<std::string, std::string>> expected;
  for (const auto& r : rows) expected.emplace_back(format_timestamp(r.arrival_timestamp), r.query_id);
  std::sort(expected.begin(), expected.end());

  std::vector<std::pair<std::string, std::string>> actual;
  for (const auto& r : parsed.traces[0].records) {
    actual.emplace_back(format_timestamp(r.arrival_timestamp), r.query_id);
  }
  EXPECT_EQ(actual, expected);
}

TEST(ParseTrace, MissingColumnNamesIt) {
  std::istringstream in("user_id,query_id,arrival_timestamp,query_type,was_cached,num_joins,"
                        "num_scans,read_table_ids\n");
  try {
    parse_trace(in);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "feature_fingerprint");
  }
}

TEST(ParseTrace, UnknownColumnNamesIt) {
  std::istringstream in(std::string(kTraceHeader) + ",cluster_id\n");
  try {
    parse_trace(in);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "cluster_id");
  }
}

TEST(ParseTrace, ColumnOrderIsFree) {
  std::istringstream in(
      "feature_fingerprint,user_id,query_id,arrival_timestamp,query_type,was_cached,num_joins,"
      "num_scans,read_table_ids\n"
      "fpX,u9,q1,2024-01-01T10:00:00Z,select,0,1,2,a;b\n");
  const auto parsed = parse_trace(in);
  ASSERT_EQ(parsed.traces.size(), 1u);
  EXPECT_EQ(parsed.traces[0].records[0].feature_fingerprint, "fpX");
}

TEST(ParseTrace, RowErrorsCarryLineNumbers) {
  const std::string good = "u1,q1,2024-01-01T10:00:00Z,select,0,1,2,a;b,x\n";
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"u1,q2,2024-13-01T10:00:00Z,select,0,1,2,a;b,x\n", "timestamp"},
      {"u1,q2,2024-01-01T10:00:00Z,select,0,-1,2,a;b,x\n", "num_joins"},
      {"u1,q2,2024-01-01T10:00:00Z,select,0,1,-2,a;b,x\n", "num_scans"},
      {"u1,q2,2024-01-01T10:00:00Z,select,2,1,2,a;b,x\n", "was_cached"},
      {"u1,q1,2024-01-01T10:00:00Z,select,0,1,2,a;b,x\n", "duplicate"},
      {"u1,q2,2024-01-01T10:00:00Z,select,0,1\n", "fields"},
  };
  for (const auto& [row, what] : cases) {
    std::istringstream in(kHeader + good + row);
    try {
      parse_trace(in);
      FAIL() << "expected RowError for " << what;
    } catch (const RowError& e) {
      EXPECT_EQ(e.line(), 3u) << what;
      EXPECT_NE(std::string(e.what()).find(what), std::string::npos) << e.what();
    }
  }
}

TEST(ParseTrace, LenientModeReportsRejectedRows) {
  std::istringstream in(kHeader +
                        "u1,q1,2024-01-01T10:00:00Z,select,0,1,2,a;b,x\n"
                        "u1,q2,not-a-time,select,0,1,2,a;b,x\n"
                        "u1,q3,2024-01-01T11:00:00Z,select,0,1,2,a;b,x\n");
  const auto parsed = parse_trace(in, ParseOptions{.strict = false});
  EXPECT_EQ(parsed.rows_read, 3u);
  ASSERT_EQ(parsed.rejected.size(), 1u);
  EXPECT_EQ(parsed.rejected[0].line, 3u);
  ASSERT_EQ(parsed.traces.size(), 1u);
  EXPECT_EQ(parsed.traces[0].records.size(), 2u);
}

TEST(ParseTrace, QuotedFingerprintsSurvive) {
  auto r = record("u1", "q1", at(2024, 1, 1, 9), {"a", "b"}, "has,comma \"and quote\"");
  std::ostringstream out;
  write_trace(out, std::vector{r});
  std::istringstream in(out.str());
  EXPECT_EQ(parse_trace(in).traces.at(0).records.at(0).feature_fingerprint,
            "has,comma \"and quote\"");
}

TEST(ParseTrace, WriteThenParseIsIdentity) {
  std::mt19937_64 rng(21);
  const QueryType types[] = {QueryType::select, QueryType::insert, QueryType::update,
                             QueryType::del, QueryType::other};
  std::vector<QueryRecord> rows;
  for (int i = 0; i < 300; ++i) {
    QueryRecord r;
    r.user_id = "user" + std::to_string(rng() % 7);
    r.query_id = "q" + std::to_string(i);
    r.arrival_timestamp = at(2023, 6, 1) + std::chrono::seconds(rng() % 10'000'000);
    r.query_type = types[rng() % 5];
    r.was_cached = rng() % 2;
    r.num_joins = static_cast<std::uint32_t>(rng() % 9);
    r.num_scans = static_cast<std::uint32_t>(rng() % 12);
    std::vector<std::string> tables;
    for (std::size_t k = rng() % 5; k > 0; --k) tables.push_back(std::to_string(rng() % 50));
    r.read_tables = Scanset(tables);
    r.feature_fingerprint = std::to_string(rng());
    rows.push_back(r);
  }
  auto expected = group_by_user(rows);
  std::ostringstream out;
  write_trace(out, std::span<const UserTrace>(expected));
  std::istringstream in(out.str());
  const auto parsed = parse_trace(in);
  ASSERT_EQ(parsed.traces.size(), expected.size());
  for (std::size_t u = 0; u < expected.size(); ++u) {
    const auto& a = expected[u].records;
    const auto& b = parsed.traces[u].records;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].user_id, b[i].user_id);
      EXPECT_EQ(a[i].query_id, b[i].query_id);
      EXPECT_EQ(a[i].arrival_timestamp, b[i].arrival_timestamp);
      EXPECT_EQ(a[i].query_type, b[i].query_type);
      EXPECT_EQ(a[i].was_cached, b[i].was_cached);
      EXPECT_EQ(hash_of(a[i]), hash_of(b[i]));
    }
  }
}

}  // namespace
}  // namespace redbench
