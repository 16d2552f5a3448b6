#include "redbench/prefilter.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "redbench/csv.hpp"

namespace redbench {

namespace {

using namespace std::chrono;

constexpr auto kWindowOpen = hours{8};
constexpr auto kWindowLength = days{4} + hours{9};

std::pair<std::uint32_t, std::uint32_t> join_range(const UserTrace& trace) {
  auto [lo, hi] = std::minmax_element(
      trace.records.begin(), trace.records.end(),
      [](const QueryRecord& a, const QueryRecord& b) { return a.num_joins < b.num_joins; });
  return {lo->num_joins, hi->num_joins};
}

}  // namespace

std::string_view to_string(QueryRule rule) {
  switch (rule) {
    case QueryRule::not_select: return "not_select";
    case QueryRule::result_cached: return "result_cached";
    case QueryRule::no_joins: return "no_joins";
    case QueryRule::join_scanset_mismatch: return "join_scanset_mismatch";
  }
  return "unknown";
}

std::string_view to_string(UserRule rule) {
  switch (rule) {
    case UserRule::no_surviving_queries: return "user_no_surviving_queries";
    case UserRule::no_weekday_window: return "user_no_weekday_window";
    case UserRule::constant_join_count: return "user_constant_join_count";
  }
  return "unknown";
}

std::optional<WeekWindow> week_window_of(Timestamp ts) {
  const sys_days day = floor<days>(ts);
  const unsigned since_monday = (weekday{day}.c_encoding() + 6) % 7;
  const sys_days monday = day - days{since_monday};
  const WeekWindow window{monday + kWindowOpen, monday + kWindowOpen + kWindowLength};
  if (window.contains(ts)) return window;
  return std::nullopt;
}

double PrefilterStats::select_share() const {
  if (input_records == 0) return 0.0;
  return static_cast<double>(select_records) / static_cast<double>(input_records);
}

PrefilterStats& PrefilterStats::operator+=(const PrefilterStats& o) {
  input_records += o.input_records;
  select_records += o.select_records;
  for (std::size_t i = 0; i < kQueryRuleCount; ++i) removed_records[i] += o.removed_records[i];
  records_outside_week += o.records_outside_week;
  records_of_dropped_users += o.records_of_dropped_users;
  surviving_records += o.surviving_records;
  input_users += o.input_users;
  for (std::size_t i = 0; i < kUserRuleCount; ++i) removed_users[i] += o.removed_users[i];
  surviving_users += o.surviving_users;
  return *this;
}

std::optional<QueryRule> first_failing_rule(const QueryRecord& r) {
  if (r.query_type != QueryType::select) return QueryRule::not_select;
  if (r.was_cached) return QueryRule::result_cached;
  if (r.num_joins < 1) return QueryRule::no_joins;
  if (r.read_tables.size() != static_cast<std::size_t>(r.num_joins) + 1) {
    return QueryRule::join_scanset_mismatch;
  }
  return std::nullopt;
}

FilteredRecords filter_queries(std::span<const QueryRecord> records) {
  FilteredRecords out;
  out.stats.input_records = records.size();
  for (const auto& r : records) {
    if (r.query_type == QueryType::select) ++out.stats.select_records;
    if (auto rule = first_failing_rule(r)) {
      ++out.stats.removed_records[static_cast<std::size_t>(*rule)];
    } else {
      out.records.push_back(r);
    }
  }
  out.stats.surviving_records = out.records.size();
  return out;
}

FilteredTraces filter_users(std::vector<UserTrace> traces) {
  FilteredTraces out;
  out.stats.input_users = traces.size();
  for (auto& t : traces) {
    out.stats.input_records += t.records.size();
    if (t.records.empty()) {
      ++out.stats.removed_users[static_cast<std::size_t>(UserRule::no_surviving_queries)];
      continue;
    }
    if (auto [lo, hi] = join_range(t); lo == hi) {
      ++out.stats.removed_users[static_cast<std::size_t>(UserRule::constant_join_count)];
      out.stats.records_of_dropped_users += t.records.size();
      continue;
    }
    out.stats.surviving_records += t.records.size();
    out.traces.push_back(std::move(t));
  }
  out.stats.surviving_users = out.traces.size();
  return out;
}

std::optional<BusiestWeek> busiest_week(const UserTrace& trace, std::size_t k) {
  // Records are in arrival order, so each window's members are contiguous
  // among the in-window records.
  std::map<Timestamp, std::vector<std::size_t>> by_window;
  std::map<Timestamp, WeekWindow> windows;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    if (auto w = week_window_of(trace.records[i].arrival_timestamp)) {
      by_window[w->start].push_back(i);
      windows.emplace(w->start, *w);
    }
  }
  if (by_window.empty()) return std::nullopt;

  auto best = by_window.begin();
  for (auto it = by_window.begin(); it != by_window.end(); ++it) {
    if (it->second.size() > best->second.size()) best = it;
  }

  BusiestWeek out;
  out.window = windows.at(best->first);
  out.window_count = best->second.size();
  out.trace.user_id = trace.user_id;
  const auto keep = std::min(k, best->second.size());
  out.trace.records.reserve(keep);
  for (std::size_t j = 0; j < keep; ++j) {
    out.trace.records.push_back(trace.records[best->second[j]]);
  }
  return out;
}

FilteredTraces run_prefilter(std::span<const UserTrace> traces, std::size_t k) {
  PrefilterStats stats;
  std::vector<UserTrace> weekly;
  stats.input_users = traces.size();
  for (const auto& t : traces) {
    auto filtered = filter_queries(t.records);
    filtered.stats.surviving_records = 0;
    stats += filtered.stats;
    if (filtered.records.empty()) {
      ++stats.removed_users[static_cast<std::size_t>(UserRule::no_surviving_queries)];
      continue;
    }
    const auto passed = filtered.records.size();
    auto week = busiest_week(UserTrace{t.user_id, std::move(filtered.records)}, k);
    if (!week) {
      ++stats.removed_users[static_cast<std::size_t>(UserRule::no_weekday_window)];
      stats.records_outside_week += passed;
      continue;
    }
    stats.records_outside_week += passed - week->trace.records.size();
    weekly.push_back(std::move(week->trace));
  }

  auto users = filter_users(std::move(weekly));
  stats.removed_users[static_cast<std::size_t>(UserRule::constant_join_count)] +=
      users.stats.removed(UserRule::constant_join_count);
  stats.records_of_dropped_users += users.stats.records_of_dropped_users;
  stats.surviving_records = users.stats.surviving_records;
  stats.surviving_users = users.stats.surviving_users;
  return FilteredTraces{std::move(users.traces), stats};
}

void write_prefilter_stats(std::ostream& out, const PrefilterStats& s) {
  out << "rule,removed_records,removed_users\n";
  for (std::size_t i = 0; i < kQueryRuleCount; ++i) {
    csv::write_row(out, {std::string(to_string(static_cast<QueryRule>(i))),
                         std::to_string(s.removed_records[i]), "0"});
  }
  csv::write_row(out, {"outside_busiest_week", std::to_string(s.records_outside_week), "0"});
  for (std::size_t i = 0; i < kUserRuleCount; ++i) {
    const auto rule = static_cast<UserRule>(i);
    const auto records =
        rule == UserRule::constant_join_count ? s.records_of_dropped_users : 0;
    csv::write_row(out, {std::string(to_string(rule)), std::to_string(records),
                         std::to_string(s.removed_users[i])});
  }
  csv::write_row(out, {"input", std::to_string(s.input_records), std::to_string(s.input_users)});
  csv::write_row(out, {"surviving", std::to_string(s.surviving_records),
                       std::to_string(s.surviving_users)});
}

}  // namespace redbench
