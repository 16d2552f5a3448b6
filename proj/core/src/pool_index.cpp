#include "redbench/pool_index.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "redbench/csv.hpp"
#include "redbench/error.hpp"

namespace redbench {

namespace {
constexpr std::string_view kStage = "index";
}

JoinRatio normalized_joins(std::int64_t joins, std::int64_t min, std::int64_t max) {
  if (min >= max) {
    throw DomainError(fmt::format("empty join range [{}, {}]", min, max));
  }
  if (joins < min || joins > max) {
    throw DomainError(fmt::format("join count {} outside [{}, {}]", joins, min, max));
  }
  return JoinRatio{joins - min, max - min};
}

JoinRatio normalized_joins_or_mid(std::int64_t joins, std::int64_t min, std::int64_t max) {
  if (min == max) {
    if (joins != min) {
      throw DomainError(fmt::format("join count {} outside [{}, {}]", joins, min, max));
    }
    return JoinRatio{1, 2};
  }
  return normalized_joins(joins, min, max);
}

PoolIndex PoolIndex::from_instances(std::vector<QueryInstance> instances) {
  PoolIndex pool;
  std::sort(instances.begin(), instances.end(),
            [](const QueryInstance& a, const QueryInstance& b) {
              return a.instance_id < b.instance_id;
            });
  std::set<std::string> tables;
  for (auto& inst : instances) {
    if (pool.instance_lookup_.count(inst.instance_id)) {
      throw Error(std::string(kStage),
                  fmt::format("duplicate instance id '{}'", inst.instance_id));
    }
    tables.insert(inst.scanset.tables().begin(), inst.scanset.tables().end());
    auto& tmpl = pool.templates_[inst.template_id];
    if (tmpl.instances.empty()) {
      tmpl.template_id = inst.template_id;
      tmpl.join_count = inst.join_count;
    }
    tmpl.instances.push_back(std::move(inst));
  }
  pool.table_count_ = tables.size();
  pool.instance_count_ = 0;
  bool first = true;
  for (auto& [id, tmpl] : pool.templates_) {
    for (std::size_t i = 0; i < tmpl.instances.size(); ++i) {
      pool.instance_lookup_[tmpl.instances[i].instance_id] = {id, i};
    }
    pool.instance_count_ += tmpl.instances.size();
    if (first) {
      pool.min_joins_ = pool.max_joins_ = tmpl.join_count;
      first = false;
    }
    pool.min_joins_ = std::min(pool.min_joins_, tmpl.join_count);
    pool.max_joins_ = std::max(pool.max_joins_, tmpl.join_count);
  }
  for (auto& [id, tmpl] : pool.templates_) {
    tmpl.normalized_join =
        normalized_joins_or_mid(tmpl.join_count, pool.min_joins_, pool.max_joins_);
  }
  return pool;
}

const QueryTemplate* PoolIndex::find_template(const std::string& id) const {
  auto it = templates_.find(id);
  return it == templates_.end() ? nullptr : &it->second;
}

const QueryInstance* PoolIndex::find_instance(const std::string& instance_id) const {
  auto it = instance_lookup_.find(instance_id);
  if (it == instance_lookup_.end()) return nullptr;
  return &templates_.at(it->second.first).instances[it->second.second];
}

PoolIndex PoolIndex::without(const std::vector<std::string>& template_ids) const {
  std::vector<QueryInstance> kept;
  for (const auto& [id, tmpl] : templates_) {
    if (std::find(template_ids.begin(), template_ids.end(), id) != template_ids.end()) continue;
    kept.insert(kept.end(), tmpl.instances.begin(), tmpl.instances.end());
  }
  return from_instances(std::move(kept));
}

PoolIndex scan_pool(const std::filesystem::path& root, const ScanOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(std::string(kStage),
                fmt::format("pool root '{}' is not a directory", root.string()));
  }
  std::vector<fs::path> files;
  for (fs::recursive_directory_iterator it(root, ec), end; it != end; it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file() && it->path().extension() == ".sql") files.push_back(it->path());
  }
  if (ec) {
    throw Error(std::string(kStage),
                fmt::format("cannot list pool root '{}': {}", root.string(), ec.message()));
  }
  if (files.empty()) {
    throw Error(std::string(kStage),
                fmt::format("empty pool: no .sql files under '{}'", root.string()));
  }
  std::sort(files.begin(), files.end());

  std::regex rule;
  try {
    rule = std::regex(options.template_rule, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(std::string(kStage),
                fmt::format("invalid template rule '{}': {}", options.template_rule, e.what()));
  }

  std::vector<QueryInstance> instances;
  instances.reserve(files.size());
  for (const auto& file : files) {
    const auto relative = file.lexically_relative(root).generic_string();
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(std::string(kStage), fmt::format("cannot read '{}'", relative));
    std::ostringstream buffer;
    buffer << in.rdbuf();

    const auto stem = file.stem().string();
    std::smatch match;
    if (!std::regex_search(stem, match, rule)) {
      throw Error(std::string(kStage),
                  fmt::format("template rule '{}' does not match '{}'", options.template_rule,
                              relative));
    }
    QueryInstance inst;
    inst.instance_id = relative;
    inst.template_id = match.size() > 1 && match[1].matched ? match[1].str() : match[0].str();
    inst.sql_text = buffer.str();
    try {
      auto analysis = analyze_sql(inst.sql_text, options.analyze);
      inst.scanset = std::move(analysis.scanset);
      inst.join_count = analysis.join_count();
    } catch (const AnalysisError& e) {
      throw Error(std::string(kStage),
                  fmt::format("{}: {} near \"{}\"", relative, e.what(), e.span()));
    }
    instances.push_back(std::move(inst));
  }
  return PoolIndex::from_instances(std::move(instances));
}

std::vector<std::string> PoolValidation::violating_templates() const {
  std::vector<std::string> ids;
  for (const auto& v : violations) ids.push_back(v.template_id);
  return ids;
}

PoolValidation validate_pool(const PoolIndex& pool) {
  PoolValidation report;
  report.degenerate = pool.degenerate();
  for (const auto& [id, tmpl] : pool.templates()) {
    report.instance_counts.emplace_back(id, tmpl.instances.size());
    std::set<std::uint32_t> joins;
    for (const auto& inst : tmpl.instances) joins.insert(inst.join_count);
    if (joins.size() > 1) {
      report.violations.push_back(PoolViolation{id, {joins.begin(), joins.end()}});
    }
  }
  return report;
}

PoolIndex quarantine(const PoolIndex& pool, const PoolValidation& validation) {
  return pool.without(validation.violating_templates());
}

void write_pool_index(std::ostream& out, const PoolIndex& pool) {
  out << "template_id,instance_id,join_count,scanset\n";
  for (const auto& [id, tmpl] : pool.templates()) {
    for (const auto& inst : tmpl.instances) {
      csv::write_row(out, {id, inst.instance_id, std::to_string(inst.join_count),
                           inst.scanset.to_string()});
    }
  }
}

void write_pool_validation(std::ostream& out, const PoolValidation& v) {
  nlohmann::ordered_json doc;
  doc["usable"] = v.usable();
  doc["degenerate"] = v.degenerate;
  auto& violations = doc["violations"] = nlohmann::ordered_json::array();
  for (const auto& viol : v.violations) {
    violations.push_back({{"template_id", viol.template_id}, {"join_counts", viol.join_counts}});
  }
  auto& counts = doc["instance_counts"] = nlohmann::ordered_json::object();
  for (const auto& [id, n] : v.instance_counts) counts[id] = n;
  out << doc.dump(2) << '\n';
}

}  // namespace redbench
