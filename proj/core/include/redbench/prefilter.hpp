#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "redbench/trace_model.hpp"

namespace redbench {

/// Record-level elimination rules, in attribution order.
enum class QueryRule : std::size_t {
  not_select = 0,
  result_cached,
  no_joins,
  join_scanset_mismatch,
};
inline constexpr std::size_t kQueryRuleCount = 4;

/// User-level elimination reasons.
enum class UserRule : std::size_t {
  no_surviving_queries = 0,
  no_weekday_window,
  constant_join_count,
};
inline constexpr std::size_t kUserRuleCount = 3;

std::string_view to_string(QueryRule rule);
std::string_view to_string(UserRule rule);

/// Monday 08:00 (inclusive) to Friday 17:00 (exclusive), UTC.
struct WeekWindow {
  Timestamp start{};
  Timestamp end{};

  bool contains(Timestamp ts) const noexcept { return start <= ts && ts < end; }
  friend bool operator==(const WeekWindow&, const WeekWindow&) = default;
};

/// The window containing `ts`, or nullopt for weekend/off-hours instants.
std::optional<WeekWindow> week_window_of(Timestamp ts);

/// Audit counters. Conservation holds for every stage:
///   input_records == surviving_records + sum(removed_records)
///                    + records_outside_week + records_of_dropped_users
///   input_users == surviving_users + sum(removed_users)
struct PrefilterStats {
  std::size_t input_records = 0;
  std::size_t select_records = 0;
  std::array<std::size_t, kQueryRuleCount> removed_records{};
  /// Dropped by the busiest-week reduction (other weeks, off-hours, beyond K).
  std::size_t records_outside_week = 0;
  /// Records that passed the query rules but belonged to a dropped user.
  std::size_t records_of_dropped_users = 0;
  std::size_t surviving_records = 0;

  std::size_t input_users = 0;
  std::array<std::size_t, kUserRuleCount> removed_users{};
  std::size_t surviving_users = 0;

  std::size_t removed(QueryRule rule) const {
    return removed_records[static_cast<std::size_t>(rule)];
  }
  std::size_t removed(UserRule rule) const {
    return removed_users[static_cast<std::size_t>(rule)];
  }
  /// Share of SELECT statements among all input records (0 when empty).
  double select_share() const;

  PrefilterStats& operator+=(const PrefilterStats& other);
};

/// The first rule that eliminates `record`, or nullopt if it survives.
std::optional<QueryRule> first_failing_rule(const QueryRecord& record);

struct FilteredRecords {
  std::vector<QueryRecord> records;
  PrefilterStats stats;
};

/// Keeps uncached SELECTs with at least one join whose join count equals the
/// scanset size minus one. Order is preserved.
FilteredRecords filter_queries(std::span<const QueryRecord> records);

struct FilteredTraces {
  std::vector<UserTrace> traces;
  PrefilterStats stats;
};

/// Drops users without records and users whose records all share one join
/// count. Record counters in the returned stats stay zero.
FilteredTraces filter_users(std::vector<UserTrace> traces);

struct BusiestWeek {
  WeekWindow window;
  /// Records inside the window before truncation to K.
  std::size_t window_count = 0;
  UserTrace trace;
};

/// Restricts `trace` to the first `k` records of its busiest week window.
/// Ties go to the earliest window. Nullopt if no record falls in a window.
std::optional<BusiestWeek> busiest_week(const UserTrace& trace, std::size_t k);

inline constexpr std::size_t kDefaultBusiestWeekK = 1000;

/// Full prefilter stage: per-user query rules, busiest week, then the
/// user-level rules on the retained week.
FilteredTraces run_prefilter(std::span<const UserTrace> traces,
                             std::size_t k = kDefaultBusiestWeekK);

/// `rule,removed_records,removed_users` plus input/survivor summary rows.
void write_prefilter_stats(std::ostream& out, const PrefilterStats& stats);

}  // namespace redbench
