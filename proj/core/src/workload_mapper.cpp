#include "redbench/workload_mapper.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "redbench/csv.hpp"
#include "redbench/error.hpp"
#include "redbench/user_sampler.hpp"

namespace redbench {

std::string_view to_string(MapCase c) {
  switch (c) {
    case MapCase::hash_hit: return "hash_hit";
    case MapCase::scanset_hit: return "scanset_hit";
    case MapCase::new_template: return "new_template";
    case MapCase::fallback_unused: return "fallback_unused";
    case MapCase::fallback_reuse: return "fallback_reuse";
  }
  return "unknown";
}

MapCase parse_map_case(std::string_view text) {
  for (auto c : {MapCase::hash_hit, MapCase::scanset_hit, MapCase::new_template,
                 MapCase::fallback_unused, MapCase::fallback_reuse}) {
    if (to_string(c) == text) return c;
  }
  throw DomainError(fmt::format("unknown map case '{}'", text));
}

std::vector<std::string> closest_templates(const JoinRatio& user_norm, const PoolIndex& pool) {
  // |a - u| compared exactly: both sides as rationals over a common
  // denominator a.den * u.den.
  auto distance = [&](const JoinRatio& a) {
    const std::int64_t lhs = a.num * user_norm.den;
    const std::int64_t rhs = user_norm.num * a.den;
    return JoinRatio{lhs > rhs ? lhs - rhs : rhs - lhs, a.den * user_norm.den};
  };
  std::vector<std::string> best;
  JoinRatio best_distance{std::numeric_limits<std::int32_t>::max(), 1};
  for (const auto& [id, tmpl] : pool.templates()) {
    const auto d = distance(tmpl.normalized_join);
    if (d < best_distance) {
      best_distance = d;
      best.clear();
    }
    if (d == best_distance) best.push_back(id);
  }
  return best;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t workload_seed(std::uint64_t global_seed, std::string_view user_id) {
  return splitmix64(global_seed ^ fnv1a64(user_id));
}

WorkloadMapper::WorkloadMapper(const PoolIndex& pool, std::uint32_t user_join_min,
                               std::uint32_t user_join_max, std::uint64_t seed)
    : pool_(pool), user_join_min_(user_join_min), user_join_max_(user_join_max), rng_(seed) {
  if (pool_.empty()) throw Error("map", "cannot map onto an empty pool");
  if (user_join_min_ > user_join_max_) {
    throw DomainError(
        fmt::format("user join range [{}, {}] is empty", user_join_min_, user_join_max_));
  }
}

std::size_t WorkloadMapper::used_count(const std::string& template_id) const {
  auto it = used_instances_.find(template_id);
  return it == used_instances_.end() ? 0 : it->second.size();
}

std::vector<std::string> WorkloadMapper::unused_instances(const std::string& template_id) const {
  std::vector<std::string> out;
  const auto* tmpl = pool_.find_template(template_id);
  auto used = used_instances_.find(template_id);
  for (const auto& inst : tmpl->instances) {
    if (used == used_instances_.end() || !used->second.count(inst.instance_id)) {
      out.push_back(inst.instance_id);
    }
  }
  return out;
}

const std::string& WorkloadMapper::pick(const std::vector<std::string>& sorted_candidates) {
  return sorted_candidates[rng_() % sorted_candidates.size()];
}

void WorkloadMapper::mark_used(const std::string& template_id, const std::string& instance_id) {
  used_instances_[template_id].insert(instance_id);
}

std::pair<std::string, MapCase> WorkloadMapper::fallback(
    const std::vector<std::string>& closest) {
  std::vector<std::string> unused;
  for (const auto& t : closest) {
    if (!mapped_templates_.count(t)) continue;
    auto more = unused_instances(t);
    unused.insert(unused.end(), more.begin(), more.end());
  }
  if (!unused.empty()) {
    std::sort(unused.begin(), unused.end());
    const std::string chosen = pick(unused);
    mark_used(pool_.find_instance(chosen)->template_id, chosen);
    return {chosen, MapCase::fallback_unused};
  }
  std::vector<std::string> all;
  for (const auto& t : closest) {
    for (const auto& inst : pool_.find_template(t)->instances) all.push_back(inst.instance_id);
  }
  std::sort(all.begin(), all.end());
  return {pick(all), MapCase::fallback_reuse};
}

MappedQuery WorkloadMapper::map(const QueryRecord& record) {
  MappedQuery out;
  out.seq = next_seq_++;
  out.source_query_id = record.query_id;
  out.source_hash = hash_of(record);

  if (auto hit = hash_to_instance_.find(out.source_hash); hit != hash_to_instance_.end()) {
    out.instance_id = hit->second;
    out.template_id = pool_.find_instance(hit->second)->template_id;
    out.map_case = MapCase::hash_hit;
    return out;
  }

  const auto user_norm =
      normalized_joins_or_mid(record.num_joins, user_join_min_, user_join_max_);
  const auto closest = closest_templates(user_norm, pool_);

  std::string chosen;
  if (auto bound = scanset_to_template_.find(record.read_tables);
      bound != scanset_to_template_.end()) {
    const auto unused = unused_instances(bound->second);
    if (!unused.empty()) {
      chosen = pick(unused);
      mark_used(bound->second, chosen);
      out.map_case = MapCase::scanset_hit;
    } else {
      std::tie(chosen, out.map_case) = fallback(closest);
    }
  } else {
    const QueryTemplate* target = nullptr;
    for (const auto& id : closest) {
      if (mapped_templates_.count(id)) continue;
      const auto* t = pool_.find_template(id);
      if (!target || t->instances.size() > target->instances.size()) target = t;
    }
    if (target) {
      scanset_to_template_.emplace(record.read_tables, target->template_id);
      mapped_templates_.insert(target->template_id);
      chosen = pick(unused_instances(target->template_id));
      mark_used(target->template_id, chosen);
      out.map_case = MapCase::new_template;
    } else {
      std::tie(chosen, out.map_case) = fallback(closest);
    }
  }

  out.instance_id = chosen;
  out.template_id = pool_.find_instance(chosen)->template_id;
  hash_to_instance_.emplace(out.source_hash, chosen);
  return out;
}

std::size_t Workload::fallback_count() const {
  return static_cast<std::size_t>(std::count_if(
      queries.begin(), queries.end(), [](const MappedQuery& q) { return is_fallback(q.map_case); }));
}

double Workload::fallback_fraction() const {
  if (queries.empty()) return 0.0;
  return static_cast<double>(fallback_count()) / static_cast<double>(queries.size());
}

Workload generate_workload(const UserTrace& trace, const PoolIndex& pool,
                           std::uint64_t global_seed) {
  Workload w;
  w.user_id = trace.user_id;
  w.global_seed = global_seed;
  w.seed = workload_seed(global_seed, trace.user_id);
  const auto hashes = trace.hashes();
  w.bucket = bucket_of(repetition_rate(hashes));
  if (trace.records.empty()) return w;

  auto [lo, hi] = std::minmax_element(
      trace.records.begin(), trace.records.end(),
      [](const QueryRecord& a, const QueryRecord& b) { return a.num_joins < b.num_joins; });
  WorkloadMapper mapper(pool, lo->num_joins, hi->num_joins, w.seed);
  w.queries.reserve(trace.records.size());
  for (const auto& r : trace.records) w.queries.push_back(mapper.map(r));
  return w;
}

void write_workload_manifest(std::ostream& out, const Workload& workload) {
  out << "seq,source_query_id,map_case,template_id,instance_id\n";
  for (const auto& q : workload.queries) {
    csv::write_row(out, {std::to_string(q.seq), q.source_query_id,
                         std::string(to_string(q.map_case)), q.template_id, q.instance_id});
  }
}

void write_workload_sql(std::ostream& out, const Workload& workload, const PoolIndex& pool) {
  for (const auto& q : workload.queries) {
    out << "-- seq:" << q.seq << '\n';
    std::string sql = pool.find_instance(q.instance_id)->sql_text;
    while (!sql.empty() && (sql.back() == '\n' || sql.back() == '\r' || sql.back() == ' ')) {
      sql.pop_back();
    }
    out << sql << '\n';
  }
}

std::vector<ManifestRow> read_workload_manifest(std::istream& in) {
  static const std::vector<std::string_view> kColumns = {
      "seq", "source_query_id", "map_case", "template_id", "instance_id"};
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw SchemaError("report", "seq", "workload manifest has no header row");
  const auto pos = csv::bind_header(*header, kColumns, "report");
  std::vector<ManifestRow> rows;
  while (auto row = reader.next()) {
    if (row->size() != header->size()) {
      throw RowError("report", reader.line(), "wrong number of fields");
    }
    ManifestRow m;
    try {
      m.seq = std::stoul((*row)[pos[0]]);
      m.map_case = parse_map_case((*row)[pos[2]]);
    } catch (const std::exception& e) {
      throw RowError("report", reader.line(), e.what());
    }
    m.source_query_id = (*row)[pos[1]];
    m.template_id = (*row)[pos[3]];
    m.instance_id = (*row)[pos[4]];
    rows.push_back(std::move(m));
  }
  return rows;
}

}  // namespace redbench
