#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "redbench/prefilter.hpp"
#include "redbench/sql_analyzer.hpp"
#include "redbench/synth_trace.hpp"
#include "redbench/workload_mapper.hpp"

namespace {

using namespace redbench;

std::string slurp(const char* relative) {
  std::ifstream in(std::string(REDBENCH_FIXTURE_DIR) + "/" + relative);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<UserTrace> synthetic_traces(std::size_t users, std::size_t n) {
  SynthSpec spec;
  spec.users = users;
  spec.queries_per_user = n;
  spec.target_rates = {0.25, 0.5, 0.75};
  spec.join_max = 6;
  spec.table_universe = 24;
  return group_by_user(synthesize(spec));
}

PoolIndex synthetic_pool(std::size_t per_level, std::size_t instances) {
  std::vector<QueryInstance> all;
  for (std::uint32_t j = 1; j <= 6; ++j) {
    for (std::size_t t = 0; t < per_level; ++t) {
      const auto id = std::to_string(j * 100 + t);
      std::vector<std::string> tables;
      for (std::uint32_t k = 0; k <= j; ++k) tables.push_back(id + "_" + std::to_string(k));
      for (std::size_t i = 0; i < instances; ++i) {
        all.push_back({id + "/" + std::to_string(i) + ".sql", id, "", Scanset(tables), j});
      }
    }
  }
  return PoolIndex::from_instances(std::move(all));
}

void BM_AnalyzeSql(benchmark::State& state) {
  const auto sql = slurp(state.range(0) == 0 ? "pools/mini/17a.sql" : "pools/tpcds_mini/query2_0.sql");
  for (auto _ : state) benchmark::DoNotOptimize(analyze_sql(sql));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * sql.size()));
}
BENCHMARK(BM_AnalyzeSql)->Arg(0)->Arg(1);

void BM_RepetitionRate(benchmark::State& state) {
  const auto traces = synthetic_traces(1, static_cast<std::size_t>(state.range(0)));
  const auto hashes = traces.at(0).hashes();
  for (auto _ : state) benchmark::DoNotOptimize(repetition_rate(hashes));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RepetitionRate)->Arg(200)->Arg(1000);

void BM_Prefilter(benchmark::State& state) {
  const auto traces = synthetic_traces(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(run_prefilter(traces));
}
BENCHMARK(BM_Prefilter)->Arg(10)->Arg(100);

void BM_GenerateWorkload(benchmark::State& state) {
  const auto traces = synthetic_traces(1, static_cast<std::size_t>(state.range(0)));
  const auto pool = synthetic_pool(8, 200);
  for (auto _ : state) benchmark::DoNotOptimize(generate_workload(traces.at(0), pool, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateWorkload)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
