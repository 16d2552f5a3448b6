#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "redbench/trace_model.hpp"

namespace redbench {

struct SqlAnalysis {
  /// Distinct base tables, lowercased.
  Scanset scanset;
  /// Every base-table reference, in order of appearance. A self-join via two
  /// aliases contributes two entries.
  std::vector<std::string> references;
  /// Names introduced by WITH clauses.
  std::vector<std::string> cte_names;

  /// References minus one, floored at zero.
  std::uint32_t join_count() const noexcept {
    return references.empty() ? 0 : static_cast<std::uint32_t>(references.size() - 1);
  }
};

struct AnalyzeOptions {
  /// Drop references to WITH-defined names; they are not base tables.
  bool cte_exclusion = true;
};

/// Extracts table references from the FROM/JOIN clauses of one statement at
/// every nesting level. This is a token scanner, not a grammar: it covers the
/// JOB, CEB and TPC-DS dialect subset and throws AnalysisError on unbalanced
/// parentheses or a FROM clause that names no table.
SqlAnalysis analyze_sql(std::string_view sql, const AnalyzeOptions& options = {});

}  // namespace redbench
