#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "redbench/trace_model.hpp"

namespace redbench {

/// Parameters for a synthetic, trace-shaped query log.
struct SynthSpec {
  std::size_t users = 1;
  std::size_t queries_per_user = 100;
  /// User i targets target_rates[i % size]; each rate times queries_per_user
  /// must be integral.
  std::vector<double> target_rates = {0.5};
  std::uint32_t join_min = 1;
  std::uint32_t join_max = 4;
  std::size_t table_universe = 16;
  /// Distinct scansets each user draws its queries from.
  std::size_t scansets_per_user = 4;
  /// Extra rows per user, relative to queries_per_user, that the prefilter
  /// must remove.
  double cached_fraction = 0.0;
  double non_select_fraction = 0.0;
  std::size_t week_span = 1;
  std::uint64_t seed = 0;
};

/// Throws Error("synth") when the spec is infeasible.
void validate(const SynthSpec& spec);

/// Records of all users, ordered by user then arrival. Every user's
/// conforming queries fall inside one Monday-08:00 to Friday-17:00 window and
/// repeat exactly round(rate * n) times.
std::vector<QueryRecord> synthesize(const SynthSpec& spec);

void write_synth_trace(std::ostream& out, const SynthSpec& spec);

}  // namespace redbench
