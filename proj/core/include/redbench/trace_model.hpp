#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace redbench {

using Timestamp = std::chrono::sys_seconds;

enum class QueryType { select, insert, update, del, other };

std::string_view to_string(QueryType type);
/// Accepts the lowercase names written by `to_string`; "delete" maps to `del`.
/// Anything unrecognised maps to `other`.
QueryType parse_query_type(std::string_view text);

/// `YYYY-MM-DDThh:mm:ssZ`, UTC.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

/// Sorted, duplicate-free set of table identifiers. Construction canonicalises
/// the order, so equal member sets always compare equal.
class Scanset {
 public:
  Scanset() = default;
  explicit Scanset(std::vector<std::string> tables);

  /// Parses the `id1;id2;...` form. An empty string is the empty set.
  static Scanset parse(std::string_view text);

  const std::vector<std::string>& tables() const noexcept { return tables_; }
  std::size_t size() const noexcept { return tables_.size(); }
  bool empty() const noexcept { return tables_.empty(); }

  /// `id1;id2;...` in canonical order.
  std::string to_string() const;

  friend auto operator<=>(const Scanset&, const Scanset&) = default;
  friend bool operator==(const Scanset&, const Scanset&) = default;

 private:
  std::vector<std::string> tables_;
};

struct QueryRecord {
  std::string user_id;
  std::string query_id;
  Timestamp arrival_timestamp{};
  QueryType query_type = QueryType::select;
  bool was_cached = false;
  std::uint32_t num_joins = 0;
  std::uint32_t num_scans = 0;
  Scanset read_tables;
  std::string feature_fingerprint;
};

/// Identity of a trace query: two records with equal hashes are the same
/// query repeated.
struct QueryHash {
  Scanset scanset;
  std::uint32_t num_joins = 0;
  std::uint32_t num_scans = 0;
  std::string feature_fingerprint;

  friend auto operator<=>(const QueryHash&, const QueryHash&) = default;
  friend bool operator==(const QueryHash&, const QueryHash&) = default;
};

QueryHash hash_of(const QueryRecord& record);

/// Fraction of positions whose hash already occurred earlier in the list.
/// Zero for an empty list.
double repetition_rate(std::span<const QueryHash> hashes);

/// Records of one user ordered by (arrival_timestamp, query_id).
struct UserTrace {
  std::string user_id;
  std::vector<QueryRecord> records;

  std::vector<QueryHash> hashes() const;
};

/// Sorts in place by (arrival_timestamp, query_id).
void sort_by_arrival(std::vector<QueryRecord>& records);

/// Groups records by user (sorted by user_id) and orders each user's records.
std::vector<UserTrace> group_by_user(std::vector<QueryRecord> records);

/// A row that was rejected in lenient mode.
struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct ParseOptions {
  /// Strict mode throws on the first malformed row; lenient mode collects it
  /// into `ParsedTrace::rejected` and continues.
  bool strict = true;
};

struct ParsedTrace {
  std::vector<UserTrace> traces;
  std::vector<RejectedRow> rejected;
  std::size_t rows_read = 0;
};

inline constexpr std::string_view kTraceHeader =
    "user_id,query_id,arrival_timestamp,query_type,was_cached,num_joins,"
    "num_scans,read_table_ids,feature_fingerprint";

ParsedTrace parse_trace(std::istream& in, const ParseOptions& options = {});
ParsedTrace parse_trace(const std::filesystem::path& path,
                        const ParseOptions& options = {});

/// Writes header plus one row per record, in the given order.
void write_trace(std::ostream& out, std::span<const QueryRecord> records);
void write_trace(std::ostream& out, std::span<const UserTrace> traces);

}  // namespace redbench

template <>
struct std::hash<redbench::Scanset> {
  std::size_t operator()(const redbench::Scanset& s) const noexcept;
};

template <>
struct std::hash<redbench::QueryHash> {
  std::size_t operator()(const redbench::QueryHash& h) const noexcept;
};
