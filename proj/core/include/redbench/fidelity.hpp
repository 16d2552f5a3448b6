#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "redbench/pool_index.hpp"
#include "redbench/trace_model.hpp"
#include "redbench/workload_mapper.hpp"

namespace redbench {

struct SeriesPoint {
  std::size_t seq = 0;
  double normalized_join = 0.0;
};

/// Preservation metrics for one generated workload.
struct FidelityReport {
  std::string user_id;
  int bucket = 0;
  std::size_t length = 0;
  double input_rate = 0.0;
  /// Repetition over the source hashes carried by the workload.
  double output_rate_by_hash = 0.0;
  /// Repetition over emitted instance ids; exceeds the hash rate when the
  /// fallback reuses an instance for a different hash.
  double output_rate_by_instance = 0.0;
  std::size_t fallback_count = 0;
  double fallback_fraction = 0.0;
  /// Input joins normalised by the user's own min/max.
  std::vector<SeriesPoint> input_join_series;
  /// Output joins normalised by the pool min/max.
  std::vector<SeriesPoint> output_join_series;
  std::size_t distinct_scansets_in = 0;
  std::size_t distinct_templates_out = 0;
  /// Distinct tables read by the user versus tables available in the pool.
  std::size_t user_table_count = 0;
  bool exceeds_pool_tables = false;
};

/// Throws Error("report") when the workload does not line up with the trace
/// (length or query-id mismatch) or names an instance missing from the pool.
FidelityReport build_report(const UserTrace& trace, const Workload& workload,
                            const PoolIndex& pool);

struct BucketSummary {
  std::size_t workloads = 0;
  std::size_t queries = 0;
  double mean_input_rate = 0.0;
  double mean_output_rate_by_hash = 0.0;
  double mean_output_rate_by_instance = 0.0;
  double mean_fallback_fraction = 0.0;
};

struct FidelitySummary {
  std::map<int, BucketSummary> buckets;
  std::size_t workloads = 0;
  std::size_t queries = 0;
  std::size_t fallback_queries = 0;
  /// Fallback share over all queries, i.e. weighted by workload length.
  double overall_fallback_fraction = 0.0;
  std::size_t users_exceeding_pool_tables = 0;
  /// Share of workloads whose user reads more tables than the pool offers.
  double table_coverage_shortfall = 0.0;
};

FidelitySummary aggregate_reports(std::span<const FidelityReport> reports);

/// Share of users whose distinct table count exceeds the pool's table count.
double table_coverage_shortfall(std::span<const UserTrace> traces, const PoolIndex& pool);

/// Rescales values to [0, 1] by their own min/max (0.5 everywhere when flat).
std::vector<double> minmax_rescale(std::span<const double> values);

/// One row per report with every scalar metric.
void write_fidelity_csv(std::ostream& out, std::span<const FidelityReport> reports);

/// `seq,input_norm_joins,output_norm_joins`.
void write_series_csv(std::ostream& out, const FidelityReport& report);

}  // namespace redbench
