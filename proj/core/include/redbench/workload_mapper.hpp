#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "redbench/pool_index.hpp"
#include "redbench/trace_model.hpp"

namespace redbench {

enum class MapCase { hash_hit, scanset_hit, new_template, fallback_unused, fallback_reuse };

std::string_view to_string(MapCase c);
/// Throws DomainError for unknown names.
MapCase parse_map_case(std::string_view text);
inline bool is_fallback(MapCase c) {
  return c == MapCase::fallback_unused || c == MapCase::fallback_reuse;
}

/// Templates whose normalised join is nearest to `user_norm`, sorted by id.
/// Several templates (possibly at different join levels) tie when equidistant.
std::vector<std::string> closest_templates(const JoinRatio& user_norm, const PoolIndex& pool);

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);
/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view text);
/// Per-workload seed: splitmix64(global_seed XOR fnv1a64(user_id)).
std::uint64_t workload_seed(std::uint64_t global_seed, std::string_view user_id);

struct MappedQuery {
  std::size_t seq = 0;
  std::string source_query_id;
  QueryHash source_hash;
  std::string instance_id;
  std::string template_id;
  MapCase map_case = MapCase::new_template;
};

/// Per-workload bookkeeping for replaying one user's trace onto a pool.
/// "Uniformly random" choices draw index = rng() mod n over candidates sorted
/// by id, from a std::mt19937_64 seeded with the per-workload seed.
class WorkloadMapper {
 public:
  /// `user_join_min`/`user_join_max` span the records that will be mapped.
  /// Throws Error on an empty pool.
  WorkloadMapper(const PoolIndex& pool, std::uint32_t user_join_min,
                 std::uint32_t user_join_max, std::uint64_t seed);

  MappedQuery map(const QueryRecord& record);

  const std::map<Scanset, std::string>& scanset_bindings() const { return scanset_to_template_; }
  const std::set<std::string>& mapped_templates() const { return mapped_templates_; }
  std::size_t used_count(const std::string& template_id) const;

 private:
  std::vector<std::string> unused_instances(const std::string& template_id) const;
  const std::string& pick(const std::vector<std::string>& sorted_candidates);
  void mark_used(const std::string& template_id, const std::string& instance_id);
  std::pair<std::string, MapCase> fallback(const std::vector<std::string>& closest);

  const PoolIndex& pool_;
  std::uint32_t user_join_min_;
  std::uint32_t user_join_max_;
  std::mt19937_64 rng_;
  std::size_t next_seq_ = 0;

  std::unordered_map<QueryHash, std::string> hash_to_instance_;
  std::map<Scanset, std::string> scanset_to_template_;
  std::map<std::string, std::set<std::string>> used_instances_;
  std::set<std::string> mapped_templates_;
};

struct Workload {
  std::string user_id;
  int bucket = 0;
  std::uint64_t global_seed = 0;
  std::uint64_t seed = 0;
  std::vector<MappedQuery> queries;

  std::size_t fallback_count() const;
  double fallback_fraction() const;
};

/// Replays `trace` in arrival order through a fresh WorkloadMapper.
Workload generate_workload(const UserTrace& trace, const PoolIndex& pool,
                           std::uint64_t global_seed);

/// `seq,source_query_id,map_case,template_id,instance_id`.
void write_workload_manifest(std::ostream& out, const Workload& workload);

/// Instances concatenated in order, each preceded by `-- seq:N`.
void write_workload_sql(std::ostream& out, const Workload& workload, const PoolIndex& pool);

struct ManifestRow {
  std::size_t seq = 0;
  std::string source_query_id;
  MapCase map_case = MapCase::new_template;
  std::string template_id;
  std::string instance_id;
};

std::vector<ManifestRow> read_workload_manifest(std::istream& in);

}  // namespace redbench
