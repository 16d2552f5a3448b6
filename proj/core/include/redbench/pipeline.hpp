#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "redbench/fidelity.hpp"
#include "redbench/pool_index.hpp"
#include "redbench/prefilter.hpp"
#include "redbench/trace_model.hpp"
#include "redbench/user_sampler.hpp"
#include "redbench/workload_mapper.hpp"

namespace redbench {

std::string_view tool_version();

struct RunConfig {
  std::filesystem::path trace;
  std::filesystem::path pool;
  std::filesystem::path out;
  std::string template_rule = std::string(kDefaultTemplateRule);
  std::size_t busiest_week_k = kDefaultBusiestWeekK;
  std::size_t users_per_bucket = 3;
  std::uint64_t seed = 0;
  bool quarantine = false;
  bool emit_sql = false;
  bool emit_plot_data = false;
  bool cte_exclusion = true;

  /// Throws Error("config") on K == 0 or users_per_bucket == 0.
  void validate() const;
};

/// Output file names, relative to the output directory.
namespace artifact {
inline constexpr const char* kPoolIndex = "pool_index.csv";
inline constexpr const char* kPoolValidation = "pool_validation.json";
inline constexpr const char* kPrefilteredTrace = "prefiltered_trace.csv";
inline constexpr const char* kPrefilterStats = "prefilter_stats.csv";
inline constexpr const char* kSelection = "selection.csv";
inline constexpr const char* kWorkloadDir = "workloads";
inline constexpr const char* kPlotDir = "plot";
inline constexpr const char* kFidelity = "fidelity.csv";
inline constexpr const char* kFidelitySummary = "fidelity_summary.json";
inline constexpr const char* kFleetMetrics = "fleet_metrics.json";
inline constexpr const char* kRun = "run.json";
}  // namespace artifact

/// File-name-safe form of a user id: [A-Za-z0-9._-] kept, anything else
/// escaped as `%XX`.
std::string safe_file_stem(std::string_view user_id);

struct IndexOutcome {
  PoolIndex pool;
  PoolValidation validation;
  std::vector<std::string> quarantined;
};

/// Scans and validates the pool, writes the index and validation report.
/// Throws Error("index") when violations exist and quarantine is off.
IndexOutcome run_index_stage(const RunConfig& config);

struct PrefilterOutcome {
  std::vector<UserTrace> traces;
  PrefilterStats stats;
};

/// Parses the raw trace, applies every prefilter rule plus the busiest-week
/// reduction, writes the surviving trace and audit stats.
PrefilterOutcome run_prefilter_stage(const RunConfig& config);

struct ReportOutcome {
  std::vector<FidelityReport> reports;
  FidelitySummary summary;
};

/// Recomputes fidelity from a prefiltered trace, the pool and the manifests
/// found in `workload_root` (selection.csv + workloads/). Writes fidelity.csv,
/// fidelity_summary.json and, with emit_plot_data, per-user series.
ReportOutcome run_report_stage(const RunConfig& config,
                               const std::filesystem::path& workload_root);

struct GenerateOutcome {
  std::size_t surviving_users = 0;
  std::vector<Workload> workloads;
  std::vector<FidelityReport> reports;
  std::vector<std::string> warnings;
};

/// Full pipeline: index, prefilter, bucket and select users, map, report.
/// Throws Error("select") when no user survives prefiltering.
GenerateOutcome run_generate(const RunConfig& config);

}  // namespace redbench
