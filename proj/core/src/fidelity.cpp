#include "redbench/fidelity.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "redbench/csv.hpp"
#include "redbench/error.hpp"

namespace redbench {

namespace {

template <typename T>
double seen_rate(const std::vector<T>& items) {
  if (items.empty()) return 0.0;
  std::unordered_set<T> seen;
  std::size_t repeats = 0;
  for (const auto& x : items) {
    if (!seen.insert(x).second) ++repeats;
  }
  return static_cast<double>(repeats) / static_cast<double>(items.size());
}

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

FidelityReport build_report(const UserTrace& trace, const Workload& workload,
                            const PoolIndex& pool) {
  const auto n = trace.records.size();
  if (workload.queries.size() != n) {
    throw Error("report", fmt::format("workload for user '{}' has {} queries, trace has {}",
                                      trace.user_id, workload.queries.size(), n));
  }
  FidelityReport r;
  r.user_id = trace.user_id;
  r.bucket = workload.bucket;
  r.length = n;

  std::vector<QueryHash> in_hashes;
  std::vector<QueryHash> out_hashes;
  std::vector<std::string> out_instances;
  in_hashes.reserve(n);
  out_hashes.reserve(n);
  out_instances.reserve(n);
  std::set<Scanset> scansets;
  std::set<std::string> tables;
  std::set<std::string> templates;
  std::uint32_t jmin = 0, jmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = trace.records[i];
    const auto& q = workload.queries[i];
    if (q.source_query_id != rec.query_id) {
      throw Error("report", fmt::format("workload position {} maps query '{}', trace has '{}'",
                                        i, q.source_query_id, rec.query_id));
    }
    in_hashes.push_back(hash_of(rec));
    out_hashes.push_back(q.source_hash);
    out_instances.push_back(q.instance_id);
    scansets.insert(rec.read_tables);
    tables.insert(rec.read_tables.tables().begin(), rec.read_tables.tables().end());
    templates.insert(q.template_id);
    if (is_fallback(q.map_case)) ++r.fallback_count;
    jmin = i == 0 ? rec.num_joins : std::min(jmin, rec.num_joins);
    jmax = i == 0 ? rec.num_joins : std::max(jmax, rec.num_joins);
  }

  r.input_rate = repetition_rate(in_hashes);
  r.output_rate_by_hash = repetition_rate(out_hashes);
  r.output_rate_by_instance = seen_rate(out_instances);
  r.fallback_fraction = n ? static_cast<double>(r.fallback_count) / static_cast<double>(n) : 0.0;
  r.distinct_scansets_in = scansets.size();
  r.distinct_templates_out = templates.size();
  r.user_table_count = tables.size();
  r.exceeds_pool_tables = tables.size() > pool.table_count();

  r.input_join_series.reserve(n);
  r.output_join_series.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = workload.queries[i];
    const auto* inst = pool.find_instance(q.instance_id);
    if (!inst) {
      throw Error("report", fmt::format("instance '{}' is not in the pool", q.instance_id));
    }
    const auto* tmpl = pool.find_template(inst->template_id);
    r.input_join_series.push_back(
        {q.seq, normalized_joins_or_mid(trace.records[i].num_joins, jmin, jmax).value()});
    r.output_join_series.push_back({q.seq, tmpl->normalized_join.value()});
  }
  return r;
}

FidelitySummary aggregate_reports(std::span<const FidelityReport> reports) {
  FidelitySummary s;
  for (const auto& r : reports) {
    auto& b = s.buckets[r.bucket];
    ++b.workloads;
    b.queries += r.length;
    b.mean_input_rate += r.input_rate;
    b.mean_output_rate_by_hash += r.output_rate_by_hash;
    b.mean_output_rate_by_instance += r.output_rate_by_instance;
    b.mean_fallback_fraction += r.fallback_fraction;
    ++s.workloads;
    s.queries += r.length;
    s.fallback_queries += r.fallback_count;
    if (r.exceeds_pool_tables) ++s.users_exceeding_pool_tables;
  }
  for (auto& [bucket, b] : s.buckets) {
    const auto k = static_cast<double>(b.workloads);
    b.mean_input_rate /= k;
    b.mean_output_rate_by_hash /= k;
    b.mean_output_rate_by_instance /= k;
    b.mean_fallback_fraction /= k;
  }
  if (s.queries) {
    s.overall_fallback_fraction =
        static_cast<double>(s.fallback_queries) / static_cast<double>(s.queries);
  }
  if (s.workloads) {
    s.table_coverage_shortfall =
        static_cast<double>(s.users_exceeding_pool_tables) / static_cast<double>(s.workloads);
  }
  return s;
}

double table_coverage_shortfall(std::span<const UserTrace> traces, const PoolIndex& pool) {
  if (traces.empty()) return 0.0;
  std::size_t exceeding = 0;
  for (const auto& t : traces) {
    std::set<std::string> tables;
    for (const auto& r : t.records) {
      tables.insert(r.read_tables.tables().begin(), r.read_tables.tables().end());
    }
    if (tables.size() > pool.table_count()) ++exceeding;
  }
  return static_cast<double>(exceeding) / static_cast<double>(traces.size());
}

std::vector<double> minmax_rescale(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double min = *lo, max = *hi;
  for (auto& v : out) v = max > min ? (v - min) / (max - min) : 0.5;
  return out;
}

void write_fidelity_csv(std::ostream& out, std::span<const FidelityReport> reports) {
  out << "user_id,bucket,length,input_rate,output_rate_by_hash,output_rate_by_instance,"
         "fallback_count,fallback_fraction,distinct_scansets_in,distinct_templates_out,"
         "user_table_count,exceeds_pool_tables\n";
  for (const auto& r : reports) {
    csv::write_row(out, {r.user_id, std::to_string(r.bucket), std::to_string(r.length),
                         fixed(r.input_rate), fixed(r.output_rate_by_hash),
                         fixed(r.output_rate_by_instance), std::to_string(r.fallback_count),
                         fixed(r.fallback_fraction), std::to_string(r.distinct_scansets_in),
                         std::to_string(r.distinct_templates_out),
                         std::to_string(r.user_table_count), r.exceeds_pool_tables ? "1" : "0"});
  }
}

void write_series_csv(std::ostream& out, const FidelityReport& r) {
  out << "seq,input_norm_joins,output_norm_joins\n";
  for (std::size_t i = 0; i < r.input_join_series.size(); ++i) {
    csv::write_row(out, {std::to_string(r.input_join_series[i].seq),
                         fixed(r.input_join_series[i].normalized_join),
                         fixed(r.output_join_series[i].normalized_join)});
  }
}

}  // namespace redbench
