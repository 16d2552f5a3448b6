#include "redbench/pipeline.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "redbench/csv.hpp"
#include "redbench/error.hpp"

namespace redbench {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::ofstream open_output(const fs::path& path, const char* stage) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(stage, fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::ifstream open_input(const fs::path& path, const char* stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(stage, fmt::format("cannot open '{}'", path.string()));
  return in;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

struct SelectionRow {
  int bucket = 0;
  std::string user_id;
};

std::vector<SelectionRow> read_selection(const fs::path& path) {
  auto in = open_input(path, "report");
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw SchemaError("report", "bucket", "selection manifest has no header row");
  const auto pos = csv::bind_header(
      *header, {"bucket", "user_id", "role", "repetition_rate", "total_variability"}, "report");
  std::vector<SelectionRow> rows;
  while (auto row = reader.next()) {
    if (row->size() != header->size()) {
      throw RowError("report", reader.line(), "wrong number of fields");
    }
    SelectionRow s;
    try {
      s.bucket = std::stoi((*row)[pos[0]]);
    } catch (const std::exception&) {
      throw RowError("report", reader.line(), "bucket is not an integer");
    }
    s.user_id = (*row)[pos[1]];
    rows.push_back(std::move(s));
  }
  return rows;
}

void write_report_artifacts(const RunConfig& config, const std::vector<FidelityReport>& reports,
                            const FidelitySummary& summary) {
  {
    auto out = open_output(config.out / artifact::kFidelity, "report");
    write_fidelity_csv(out, reports);
  }
  {
    ordered_json doc;
    doc["workloads"] = summary.workloads;
    doc["queries"] = summary.queries;
    doc["fallback_queries"] = summary.fallback_queries;
    doc["overall_fallback_fraction"] = round6(summary.overall_fallback_fraction);
    doc["users_exceeding_pool_tables"] = summary.users_exceeding_pool_tables;
    auto& buckets = doc["buckets"] = ordered_json::array();
    for (const auto& [bucket, b] : summary.buckets) {
      buckets.push_back({{"bucket", bucket},
                         {"workloads", b.workloads},
                         {"queries", b.queries},
                         {"mean_input_rate", round6(b.mean_input_rate)},
                         {"mean_output_rate_by_hash", round6(b.mean_output_rate_by_hash)},
                         {"mean_output_rate_by_instance", round6(b.mean_output_rate_by_instance)},
                         {"mean_fallback_fraction", round6(b.mean_fallback_fraction)}});
    }
    auto out = open_output(config.out / artifact::kFidelitySummary, "report");
    out << doc.dump(2) << '\n';
  }
  if (config.emit_plot_data) {
    for (const auto& r : reports) {
      auto out = open_output(
          config.out / artifact::kPlotDir / ("series_" + safe_file_stem(r.user_id) + ".csv"),
          "report");
      write_series_csv(out, r);
    }
  }
}

PoolIndex load_pool(const RunConfig& config, PoolValidation* validation_out,
                    std::vector<std::string>* quarantined_out) {
  ScanOptions options;
  options.template_rule = config.template_rule;
  options.analyze.cte_exclusion = config.cte_exclusion;
  auto pool = scan_pool(config.pool, options);
  auto validation = validate_pool(pool);
  if (!validation.usable()) {
    if (!config.quarantine) {
      throw Error("index",
                  fmt::format("pool has templates with inconsistent join counts: {} "
                              "(rerun with --quarantine to drop them)",
                              fmt::join(validation.violating_templates(), ", ")));
    }
    if (quarantined_out) *quarantined_out = validation.violating_templates();
    pool = quarantine(pool, validation);
  }
  if (validation_out) *validation_out = std::move(validation);
  return pool;
}

}  // namespace

std::string_view tool_version() { return REDBENCH_VERSION; }

void RunConfig::validate() const {
  if (busiest_week_k == 0) throw Error("config", "--busiest-week-k must be at least 1");
  if (users_per_bucket == 0) throw Error("config", "--users-per-bucket must be at least 1");
}

std::string safe_file_stem(std::string_view user_id) {
  std::string out;
  for (unsigned char c : user_id) {
    if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
      out.push_back(static_cast<char>(c));
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  if (out.empty() || out == "." || out == "..") out = "%" + out;
  return out;
}

IndexOutcome run_index_stage(const RunConfig& config) {
  IndexOutcome outcome;
  outcome.pool = load_pool(config, &outcome.validation, &outcome.quarantined);
  {
    auto out = open_output(config.out / artifact::kPoolIndex, "index");
    write_pool_index(out, outcome.pool);
  }
  {
    auto out = open_output(config.out / artifact::kPoolValidation, "index");
    write_pool_validation(out, outcome.validation);
  }
  return outcome;
}

PrefilterOutcome run_prefilter_stage(const RunConfig& config) {
  config.validate();
  auto parsed = parse_trace(config.trace);
  auto filtered = run_prefilter(parsed.traces, config.busiest_week_k);
  {
    auto out = open_output(config.out / artifact::kPrefilteredTrace, "prefilter");
    write_trace(out, std::span<const UserTrace>(filtered.traces));
  }
  {
    auto out = open_output(config.out / artifact::kPrefilterStats, "prefilter");
    write_prefilter_stats(out, filtered.stats);
  }
  return PrefilterOutcome{std::move(filtered.traces), filtered.stats};
}

ReportOutcome run_report_stage(const RunConfig& config, const fs::path& workload_root) {
  const auto pool = load_pool(config, nullptr, nullptr);
  const auto traces = parse_trace(config.trace).traces;
  std::unordered_map<std::string, const UserTrace*> by_user;
  for (const auto& t : traces) by_user.emplace(t.user_id, &t);

  ReportOutcome outcome;
  for (const auto& sel : read_selection(workload_root / artifact::kSelection)) {
    auto it = by_user.find(sel.user_id);
    if (it == by_user.end()) {
      throw Error("report", fmt::format("selected user '{}' is not in the trace", sel.user_id));
    }
    const UserTrace& trace = *it->second;
    const auto manifest_path =
        workload_root / artifact::kWorkloadDir / (safe_file_stem(sel.user_id) + ".csv");
    auto in = open_input(manifest_path, "report");
    const auto rows = read_workload_manifest(in);
    if (rows.size() != trace.records.size()) {
      throw Error("report", fmt::format("'{}' has {} rows, trace has {} records",
                                        manifest_path.string(), rows.size(),
                                        trace.records.size()));
    }
    Workload w;
    w.user_id = sel.user_id;
    w.bucket = sel.bucket;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      MappedQuery q;
      q.seq = rows[i].seq;
      q.source_query_id = rows[i].source_query_id;
      q.source_hash = hash_of(trace.records[i]);
      q.instance_id = rows[i].instance_id;
      q.template_id = rows[i].template_id;
      q.map_case = rows[i].map_case;
      w.queries.push_back(std::move(q));
    }
    outcome.reports.push_back(build_report(trace, w, pool));
  }
  outcome.summary = aggregate_reports(outcome.reports);
  write_report_artifacts(config, outcome.reports, outcome.summary);
  return outcome;
}

GenerateOutcome run_generate(const RunConfig& config) {
  config.validate();
  GenerateOutcome outcome;

  auto index = run_index_stage(config);
  for (const auto& id : index.quarantined) {
    outcome.warnings.push_back(fmt::format("quarantined template '{}'", id));
  }
  if (index.validation.degenerate) {
    outcome.warnings.push_back(
        "pool is degenerate (all templates share one join count); normalised joins are 0.5");
  }
  const PoolIndex& pool = index.pool;

  auto prefiltered = run_prefilter_stage(config);
  outcome.surviving_users = prefiltered.traces.size();
  if (prefiltered.traces.empty()) throw Error("select", "no users survive prefiltering");

  std::vector<UserProfile> profiles;
  profiles.reserve(prefiltered.traces.size());
  std::unordered_map<std::string, const UserTrace*> by_user;
  for (const auto& t : prefiltered.traces) {
    profiles.push_back(profile_user(t));
    by_user.emplace(t.user_id, &t);
  }
  const auto selection = select_users(profiles, config.users_per_bucket);
  outcome.warnings.insert(outcome.warnings.end(), selection.warnings.begin(),
                          selection.warnings.end());
  {
    auto out = open_output(config.out / artifact::kSelection, "select");
    write_selection(out, selection);
  }

  for (const auto& sel : selection.users) {
    const UserTrace& trace = *by_user.at(sel.profile.user_id);
    auto workload = generate_workload(trace, pool, config.seed);
    const auto stem = safe_file_stem(workload.user_id);
    {
      auto out = open_output(config.out / artifact::kWorkloadDir / (stem + ".csv"), "map");
      write_workload_manifest(out, workload);
    }
    if (config.emit_sql) {
      auto out = open_output(config.out / artifact::kWorkloadDir / (stem + ".sql"), "map");
      write_workload_sql(out, workload, pool);
    }
    outcome.reports.push_back(build_report(trace, workload, pool));
    outcome.workloads.push_back(std::move(workload));
  }

  const auto summary = aggregate_reports(outcome.reports);
  write_report_artifacts(config, outcome.reports, summary);

  {
    ordered_json fleet;
    fleet["input_records"] = prefiltered.stats.input_records;
    fleet["select_records"] = prefiltered.stats.select_records;
    fleet["select_share"] = prefiltered.stats.select_share();
    fleet["generated_queries"] = summary.queries;
    fleet["fallback_queries"] = summary.fallback_queries;
    fleet["overall_fallback_fraction"] = summary.overall_fallback_fraction;
    fleet["pool_table_count"] = pool.table_count();
    fleet["prefiltered_users"] = prefiltered.traces.size();
    fleet["table_coverage_shortfall"] = table_coverage_shortfall(prefiltered.traces, pool);
    auto out = open_output(config.out / artifact::kFleetMetrics, "report");
    out << fleet.dump(2) << '\n';
  }

  {
    ordered_json run;
    run["tool"] = "redbench";
    run["version"] = tool_version();
    run["config"] = {{"trace", config.trace.generic_string()},
                     {"pool", config.pool.generic_string()},
                     {"template_rule", config.template_rule},
                     {"busiest_week_k", config.busiest_week_k},
                     {"users_per_bucket", config.users_per_bucket},
                     {"seed", config.seed},
                     {"quarantine", config.quarantine},
                     {"emit_sql", config.emit_sql},
                     {"emit_plot_data", config.emit_plot_data},
                     {"cte_exclusion", config.cte_exclusion}};
    run["counts"] = {{"pool_templates", pool.templates().size()},
                     {"pool_instances", pool.instance_count()},
                     {"input_records", prefiltered.stats.input_records},
                     {"input_users", prefiltered.stats.input_users},
                     {"prefiltered_records", prefiltered.stats.surviving_records},
                     {"prefiltered_users", prefiltered.stats.surviving_users},
                     {"workloads", outcome.workloads.size()},
                     {"mapped_queries", summary.queries},
                     {"fallback_queries", summary.fallback_queries}};
    run["warnings"] = outcome.warnings;
    auto out = open_output(config.out / artifact::kRun, "report");
    out << run.dump(2) << '\n';
  }
  return outcome;
}

}  // namespace redbench
