// redbench: maps query-log traces onto a support benchmark's query pool.
//
//   redbench index     --pool DIR --out DIR
//   redbench prefilter --trace FILE --out DIR
//   redbench synth     --out FILE [--users N --queries N --rate R[,R...]]
//   redbench generate  --trace FILE --pool DIR --out DIR
//   redbench report    --trace PREFILTERED --pool DIR --workloads DIR --out DIR
//
// REDBENCH_LOG=debug|info|warn|error|off sets verbosity (default: info).

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "redbench/error.hpp"
#include "redbench/pipeline.hpp"
#include "redbench/synth_trace.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("redbench");
  logger->set_pattern("%^[%l]%$ %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("REDBENCH_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

void add_pool_options(CLI::App& cmd, redbench::RunConfig& config) {
  cmd.add_option("--pool", config.pool, "Support benchmark directory of .sql files")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd.add_option("--template-rule", config.template_rule,
                 "Regex over file stems; group 1 is the template id")
      ->capture_default_str();
  cmd.add_flag("--quarantine", config.quarantine,
               "Drop templates whose instances disagree on join count");
  cmd.add_flag("!--no-cte-exclusion", config.cte_exclusion,
               "Count references to WITH-defined names as tables");
}

void add_prefilter_options(CLI::App& cmd, redbench::RunConfig& config) {
  cmd.add_option("--busiest-week-k", config.busiest_week_k,
                 "Queries kept from each user's busiest week")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Trace-driven workload generation over a support benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(redbench::tool_version()));

  redbench::RunConfig config;
  redbench::SynthSpec synth;
  std::filesystem::path synth_out;
  std::filesystem::path workload_root;

  auto* index = app.add_subcommand("index", "Scan, validate and export the query pool");
  add_pool_options(*index, config);
  index->add_option("--out", config.out, "Output directory")->required();

  auto* prefilter = app.add_subcommand("prefilter", "Apply prefilter rules and busiest week");
  prefilter->add_option("--trace", config.trace, "Trace CSV")
      ->required()
      ->check(CLI::ExistingFile);
  add_prefilter_options(*prefilter, config);
  prefilter->add_option("--out", config.out, "Output directory")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic trace CSV");
  synth_cmd->add_option("--out", synth_out, "Trace CSV to write")->required();
  synth_cmd->add_option("--users", synth.users)->capture_default_str();
  synth_cmd->add_option("--queries", synth.queries_per_user, "Queries per user")
      ->capture_default_str();
  synth_cmd->add_option("--rate", synth.target_rates, "Target repetition rate(s), cycled over users")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--join-min", synth.join_min)->capture_default_str();
  synth_cmd->add_option("--join-max", synth.join_max)->capture_default_str();
  synth_cmd->add_option("--tables", synth.table_universe, "Table universe size")
      ->capture_default_str();
  synth_cmd->add_option("--scansets-per-user", synth.scansets_per_user)->capture_default_str();
  synth_cmd->add_option("--cached-fraction", synth.cached_fraction)->capture_default_str();
  synth_cmd->add_option("--non-select-fraction", synth.non_select_fraction)
      ->capture_default_str();
  synth_cmd->add_option("--weeks", synth.week_span)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

  auto* generate = app.add_subcommand("generate", "Run the full pipeline");
  generate->add_option("--trace", config.trace, "Trace CSV")
      ->required()
      ->check(CLI::ExistingFile);
  add_pool_options(*generate, config);
  add_prefilter_options(*generate, config);
  generate->add_option("--users-per-bucket", config.users_per_bucket)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", config.seed)->capture_default_str();
  generate->add_option("--out", config.out, "Output directory")->required();
  generate->add_flag("--emit-sql", config.emit_sql, "Write a playback .sql per workload");
  generate->add_flag("--emit-plot-data", config.emit_plot_data,
                     "Write per-workload join-complexity series");

  auto* report = app.add_subcommand("report", "Recompute fidelity from generated manifests");
  report->add_option("--trace", config.trace, "Prefiltered trace CSV")
      ->required()
      ->check(CLI::ExistingFile);
  add_pool_options(*report, config);
  report->add_option("--workloads", workload_root,
                     "Directory holding selection.csv and workloads/ (default: --out)");
  report->add_option("--out", config.out, "Output directory")->required();
  report->add_flag("--emit-plot-data", config.emit_plot_data,
                   "Write per-workload join-complexity series");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*index) {
      const auto outcome = redbench::run_index_stage(config);
      for (const auto& id : outcome.quarantined) spdlog::warn("quarantined template '{}'", id);
      if (outcome.validation.degenerate) spdlog::warn("pool is degenerate");
      spdlog::info("indexed {} templates, {} instances", outcome.pool.templates().size(),
                   outcome.pool.instance_count());
    } else if (*prefilter) {
      const auto outcome = redbench::run_prefilter_stage(config);
      spdlog::info("{} of {} users survive prefiltering ({} records)",
                   outcome.stats.surviving_users, outcome.stats.input_users,
                   outcome.stats.surviving_records);
    } else if (*synth_cmd) {
      std::ofstream out(synth_out, std::ios::binary | std::ios::trunc);
      if (!out) throw redbench::Error("synth", "cannot write '" + synth_out.string() + "'");
      redbench::write_synth_trace(out, synth);
      spdlog::info("wrote {} users x {} queries to {}", synth.users, synth.queries_per_user,
                   synth_out.string());
    } else if (*generate) {
      const auto outcome = redbench::run_generate(config);
      for (const auto& w : outcome.warnings) spdlog::warn("{}", w);
      spdlog::info("generated {} workloads from {} prefiltered users", outcome.workloads.size(),
                   outcome.surviving_users);
    } else if (*report) {
      if (workload_root.empty()) workload_root = config.out;
      const auto outcome = redbench::run_report_stage(config, workload_root);
      spdlog::info("reported {} workloads, overall fallback fraction {:.4f}",
                   outcome.reports.size(), outcome.summary.overall_fallback_fraction);
    }
  } catch (const redbench::RowError& e) {
    spdlog::error("[{}] line {}: {}", e.stage(), e.line(), e.what());
    return 1;
  } catch (const redbench::Error& e) {
    spdlog::error("[{}] {}", e.stage(), e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
