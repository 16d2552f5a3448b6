#include "redbench/trace_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_set>

#include <fmt/format.h>

#include "redbench/csv.hpp"
#include "redbench/error.hpp"

namespace redbench {

namespace {

constexpr std::string_view kStage = "parse";

std::size_t combine(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::string_view to_string(QueryType type) {
  switch (type) {
    case QueryType::select: return "select";
    case QueryType::insert: return "insert";
    case QueryType::update: return "update";
    case QueryType::del: return "delete";
    case QueryType::other: return "other";
  }
  return "other";
}

QueryType parse_query_type(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "select") return QueryType::select;
  if (lower == "insert") return QueryType::insert;
  if (lower == "update") return QueryType::update;
  if (lower == "delete") return QueryType::del;
  return QueryType::other;
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  // YYYY-MM-DDThh:mm:ssZ
  auto bad = [&] {
    return DomainError(fmt::format("unparsable timestamp '{}'", text));
  };
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    throw bad();
  }
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
    throw bad();
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw bad();
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss tod{ts - day_point};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z",
                     static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()), tod.hours().count(),
                     tod.minutes().count(), tod.seconds().count());
}

Scanset::Scanset(std::vector<std::string> tables) : tables_(std::move(tables)) {
  std::sort(tables_.begin(), tables_.end());
  tables_.erase(std::unique(tables_.begin(), tables_.end()), tables_.end());
}

Scanset Scanset::parse(std::string_view text) {
  std::vector<std::string> tables;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(';', start), text.size());
    if (end > start) tables.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return Scanset(std::move(tables));
}

std::string Scanset::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    if (i) out.push_back(';');
    out += tables_[i];
  }
  return out;
}

QueryHash hash_of(const QueryRecord& record) {
  return QueryHash{record.read_tables, record.num_joins, record.num_scans,
                   record.feature_fingerprint};
}

double repetition_rate(std::span<const QueryHash> hashes) {
  if (hashes.empty()) return 0.0;
  std::unordered_set<QueryHash> seen;
  std::size_t repeats = 0;
  for (const auto& h : hashes) {
    if (!seen.insert(h).second) ++repeats;
  }
  return static_cast<double>(repeats) / static_cast<double>(hashes.size());
}

std::vector<QueryHash> UserTrace::hashes() const {
  std::vector<QueryHash> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(hash_of(r));
  return out;
}

void sort_by_arrival(std::vector<QueryRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const QueryRecord& a, const QueryRecord& b) {
                     if (a.arrival_timestamp != b.arrival_timestamp) {
                       return a.arrival_timestamp < b.arrival_timestamp;
                     }
                     return a.query_id < b.query_id;
                   });
}

std::vector<UserTrace> group_by_user(std::vector<QueryRecord> records) {
  std::map<std::string, std::vector<QueryRecord>> by_user;
  for (auto& r : records) by_user[r.user_id].push_back(std::move(r));
  std::vector<UserTrace> traces;
  traces.reserve(by_user.size());
  for (auto& [user, recs] : by_user) {
    sort_by_arrival(recs);
    traces.push_back(UserTrace{user, std::move(recs)});
  }
  return traces;
}

ParsedTrace parse_trace(std::istream& in, const ParseOptions& options) {
  static const std::vector<std::string_view> kColumns = {
      "user_id",   "query_id",  "arrival_timestamp", "query_type",         "was_cached",
      "num_joins", "num_scans", "read_table_ids",    "feature_fingerprint"};
  enum { kUser, kQuery, kTs, kType, kCached, kJoins, kScans, kTables, kFingerprint };

  ParsedTrace result;
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) {
    throw SchemaError(std::string(kStage), "user_id", "trace file has no header row");
  }
  const auto pos = csv::bind_header(*header, kColumns, std::string(kStage));

  std::vector<QueryRecord> records;
  std::unordered_set<std::string> query_ids;
  while (auto row = reader.next()) {
    ++result.rows_read;
    const auto line = reader.line();
    try {
      if (row->size() != header->size()) {
        throw RowError(std::string(kStage), line,
                       fmt::format("expected {} fields, found {}", header->size(),
                                   row->size()));
      }
      const auto& f = *row;
      QueryRecord r;
      r.user_id = f[pos[kUser]];
      r.query_id = f[pos[kQuery]];
      if (r.user_id.empty()) throw RowError(std::string(kStage), line, "empty user_id");
      if (r.query_id.empty()) throw RowError(std::string(kStage), line, "empty query_id");
      try {
        r.arrival_timestamp = parse_timestamp(f[pos[kTs]]);
      } catch (const DomainError& e) {
        throw RowError(std::string(kStage), line, e.what());
      }
      r.query_type = parse_query_type(f[pos[kType]]);
      const auto& cached = f[pos[kCached]];
      if (cached != "0" && cached != "1") {
        throw RowError(std::string(kStage), line,
                       fmt::format("was_cached must be 0 or 1, got '{}'", cached));
      }
      r.was_cached = cached == "1";
      auto parse_count = [&](std::string_view name, const std::string& text) {
        std::uint32_t value = 0;
        if (!parse_int(text, value)) {
          throw RowError(std::string(kStage), line,
                         fmt::format("{} must be a non-negative integer, got '{}'", name,
                                     text));
        }
        return value;
      };
      r.num_joins = parse_count("num_joins", f[pos[kJoins]]);
      r.num_scans = parse_count("num_scans", f[pos[kScans]]);
      r.read_tables = Scanset::parse(f[pos[kTables]]);
      r.feature_fingerprint = f[pos[kFingerprint]];
      if (!query_ids.insert(r.query_id).second) {
        throw RowError(std::string(kStage), line,
                       fmt::format("duplicate query_id '{}'", r.query_id));
      }
      records.push_back(std::move(r));
    } catch (const RowError& e) {
      if (options.strict) throw;
      result.rejected.push_back(RejectedRow{e.line(), e.what()});
    }
  }
  result.traces = group_by_user(std::move(records));
  return result;
}

ParsedTrace parse_trace(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(std::string(kStage), fmt::format("cannot open trace '{}'", path.string()));
  }
  return parse_trace(in, options);
}

void write_trace(std::ostream& out, std::span<const QueryRecord> records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    csv::write_row(out, {r.user_id, r.query_id, format_timestamp(r.arrival_timestamp),
                         std::string(to_string(r.query_type)), r.was_cached ? "1" : "0",
                         std::to_string(r.num_joins), std::to_string(r.num_scans),
                         r.read_tables.to_string(), r.feature_fingerprint});
  }
}

void write_trace(std::ostream& out, std::span<const UserTrace> traces) {
  std::vector<QueryRecord> all;
  for (const auto& t : traces) all.insert(all.end(), t.records.begin(), t.records.end());
  write_trace(out, all);
}

}  // namespace redbench

std::size_t std::hash<redbench::Scanset>::operator()(
    const redbench::Scanset& s) const noexcept {
  std::size_t seed = s.size();
  for (const auto& t : s.tables()) seed = redbench::combine(seed, std::hash<std::string>{}(t));
  return seed;
}

std::size_t std::hash<redbench::QueryHash>::operator()(
    const redbench::QueryHash& h) const noexcept {
  std::size_t seed = std::hash<redbench::Scanset>{}(h.scanset);
  seed = redbench::combine(seed, h.num_joins);
  seed = redbench::combine(seed, h.num_scans);
  seed = redbench::combine(seed, std::hash<std::string>{}(h.feature_fingerprint));
  return seed;
}
