#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "redbench/sql_analyzer.hpp"
#include "redbench/trace_model.hpp"

namespace redbench {

/// Exact non-negative rational in [0, 1]; used for normalised join counts so
/// that equidistance ties are decided without rounding.
struct JoinRatio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const JoinRatio& a, const JoinRatio& b) noexcept {
    return a.num * b.den == b.num * a.den;
  }
  friend std::strong_ordering operator<=>(const JoinRatio& a, const JoinRatio& b) noexcept {
    return a.num * b.den <=> b.num * a.den;
  }
};

/// Maps `joins` linearly from [min, max] onto [0, 1]. Throws DomainError if
/// `joins` lies outside the range or the range is empty (min >= max).
JoinRatio normalized_joins(std::int64_t joins, std::int64_t min, std::int64_t max);

/// Like `normalized_joins` but returns 1/2 for a degenerate range (min == max).
JoinRatio normalized_joins_or_mid(std::int64_t joins, std::int64_t min, std::int64_t max);

struct QueryInstance {
  std::string instance_id;  // path relative to the pool root, '/'-separated
  std::string template_id;
  std::string sql_text;
  Scanset scanset;
  std::uint32_t join_count = 0;
};

struct QueryTemplate {
  std::string template_id;
  /// Sorted by instance_id.
  std::vector<QueryInstance> instances;
  /// Join count of the first instance; `validate_pool` checks the others.
  std::uint32_t join_count = 0;
  JoinRatio normalized_join;
};

/// Support-benchmark catalogue. Immutable after construction.
class PoolIndex {
 public:
  PoolIndex() = default;

  /// Groups instances by template_id and computes the pool join range.
  static PoolIndex from_instances(std::vector<QueryInstance> instances);

  const std::map<std::string, QueryTemplate>& templates() const noexcept { return templates_; }
  const QueryTemplate* find_template(const std::string& id) const;
  const QueryInstance* find_instance(const std::string& instance_id) const;

  std::uint32_t min_joins() const noexcept { return min_joins_; }
  std::uint32_t max_joins() const noexcept { return max_joins_; }
  /// All templates share one join count; every normalised join is 1/2.
  bool degenerate() const noexcept { return min_joins_ == max_joins_; }
  bool empty() const noexcept { return templates_.empty(); }
  std::size_t instance_count() const noexcept { return instance_count_; }
  /// Distinct tables referenced anywhere in the pool.
  std::size_t table_count() const noexcept { return table_count_; }

  /// A copy without the given templates, join range recomputed.
  PoolIndex without(const std::vector<std::string>& template_ids) const;

 private:
  std::map<std::string, QueryTemplate> templates_;
  std::map<std::string, std::pair<std::string, std::size_t>> instance_lookup_;
  std::uint32_t min_joins_ = 0;
  std::uint32_t max_joins_ = 0;
  std::size_t instance_count_ = 0;
  std::size_t table_count_ = 0;
};

inline constexpr std::string_view kDefaultTemplateRule = R"(^(\d+))";

struct ScanOptions {
  /// ECMAScript regex searched in each file stem; capture group 1 (or the
  /// whole match when there is no group) is the template id.
  std::string template_rule = std::string(kDefaultTemplateRule);
  AnalyzeOptions analyze;
};

/// Recursively collects `*.sql` under `root` in sorted path order and analyses
/// each file. Throws Error naming the file on unreadable input, an unmatched
/// template rule or an analysis failure; throws Error when no SQL file exists.
PoolIndex scan_pool(const std::filesystem::path& root, const ScanOptions& options = {});

struct PoolViolation {
  std::string template_id;
  /// Distinct join counts observed, ascending.
  std::vector<std::uint32_t> join_counts;
};

struct PoolValidation {
  std::vector<PoolViolation> violations;
  bool degenerate = false;
  std::vector<std::pair<std::string, std::size_t>> instance_counts;

  bool usable() const noexcept { return violations.empty(); }
  std::vector<std::string> violating_templates() const;
};

PoolValidation validate_pool(const PoolIndex& pool);

/// Drops every template named in `validation.violations`.
PoolIndex quarantine(const PoolIndex& pool, const PoolValidation& validation);

/// `template_id,instance_id,join_count,scanset`, one row per instance in
/// template then instance order.
void write_pool_index(std::ostream& out, const PoolIndex& pool);

/// Human-readable JSON of the validation report.
void write_pool_validation(std::ostream& out, const PoolValidation& validation);

}  // namespace redbench
