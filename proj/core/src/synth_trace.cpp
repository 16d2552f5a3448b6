#include "redbench/synth_trace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "redbench/error.hpp"

namespace redbench {

namespace {

using namespace std::chrono;

// 2024-03-04 is a Monday.
const Timestamp kFirstWindow = sys_days{year{2024} / March / 4} + hours{8};
constexpr std::int64_t kWindowSeconds = (4 * 24 + 9) * 3600;

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

std::size_t repeats_for(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

std::vector<std::string> sample_tables(Stream& rng, std::size_t universe, std::size_t k) {
  std::vector<std::size_t> ids(universe);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(ids[i], ids[i + rng.below(universe - i)]);
    out.push_back(fmt::format("t{:03d}", ids[i]));
  }
  return out;
}

}  // namespace

void validate(const SynthSpec& spec) {
  auto fail = [](const std::string& msg) { throw Error("synth", msg); };
  const auto n = spec.queries_per_user;
  if (n == 0) fail("queries_per_user must be positive");
  if (spec.target_rates.empty()) fail("at least one target rate is required");
  for (double r : spec.target_rates) {
    const double max_rate = static_cast<double>(n - 1) / static_cast<double>(n);
    if (!(r >= 0.0) || r > max_rate + 1e-12) {
      fail(fmt::format("target rate {} infeasible for {} queries (max {})", r, n, max_rate));
    }
    const double scaled = r * static_cast<double>(n);
    if (std::abs(scaled - std::round(scaled)) > 1e-9) {
      fail(fmt::format("target rate {} times {} queries is not integral", r, n));
    }
  }
  if (spec.join_min == 0) fail("join_min must be at least 1");
  if (spec.join_min > spec.join_max) fail("join_min exceeds join_max");
  if (spec.table_universe < static_cast<std::size_t>(spec.join_max) + 1) {
    fail(fmt::format("table universe {} too small for {} joins", spec.table_universe,
                     spec.join_max));
  }
  if (spec.scansets_per_user == 0) fail("scansets_per_user must be positive");
  for (double f : {spec.cached_fraction, spec.non_select_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) fail(fmt::format("noise fraction {} outside [0, 1]", f));
  }
  if (spec.week_span == 0) fail("week_span must be positive");
}

std::vector<QueryRecord> synthesize(const SynthSpec& spec) {
  validate(spec);
  Stream rng(spec.seed);
  std::vector<QueryRecord> all;
  std::size_t fingerprint = 0;
  std::size_t query_counter = 0;
  const auto n = spec.queries_per_user;
  const std::uint32_t join_levels = spec.join_max - spec.join_min + 1;

  for (std::size_t u = 0; u < spec.users; ++u) {
    const std::string user = fmt::format("u{:04d}", u + 1);
    const double rate = spec.target_rates[u % spec.target_rates.size()];
    const std::size_t repeats = repeats_for(rate, n);
    const std::size_t distinct = n - repeats;

    // Scanset vocabulary; the first two entries pin both ends of the join
    // range so the user survives the constant-join-count rule.
    std::vector<Scanset> vocabulary;
    for (std::size_t k = 0; k < spec.scansets_per_user; ++k) {
      std::uint32_t joins = spec.join_min + static_cast<std::uint32_t>(rng.below(join_levels));
      if (k == 0) joins = spec.join_min;
      if (k == 1) joins = spec.join_max;
      vocabulary.emplace_back(sample_tables(rng, spec.table_universe, joins + 1));
    }

    std::vector<QueryRecord> base(distinct);
    for (std::size_t b = 0; b < distinct; ++b) {
      auto& q = base[b];
      q.user_id = user;
      const std::size_t pick = b < 2 && b < vocabulary.size() ? b : rng.below(vocabulary.size());
      q.read_tables = vocabulary[pick];
      q.num_joins = static_cast<std::uint32_t>(q.read_tables.size() - 1);
      q.num_scans = static_cast<std::uint32_t>(q.read_tables.size());
      q.feature_fingerprint = fmt::format("fp{:06d}", ++fingerprint);
    }

    // Repeat positions: a uniform R-subset of 1..n-1 (position 0 is always new).
    std::vector<std::size_t> positions(n > 0 ? n - 1 : 0);
    std::iota(positions.begin(), positions.end(), 1);
    std::vector<bool> is_repeat(n, false);
    for (std::size_t i = 0; i < repeats; ++i) {
      std::swap(positions[i], positions[i + rng.below(positions.size() - i)]);
      is_repeat[positions[i]] = true;
    }

    std::vector<QueryRecord> sequence;
    sequence.reserve(n);
    std::size_t introduced = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_repeat[i]) {
        sequence.push_back(base[rng.below(introduced)]);
      } else {
        sequence.push_back(base[introduced++]);
      }
    }

    const Timestamp window =
        kFirstWindow + days{7} * static_cast<std::int64_t>(rng.below(spec.week_span));
    std::vector<std::int64_t> offsets(n);
    for (auto& o : offsets) o = static_cast<std::int64_t>(rng.below(kWindowSeconds));
    std::sort(offsets.begin(), offsets.end());

    std::vector<std::pair<std::int64_t, QueryRecord>> rows;
    for (std::size_t i = 0; i < n; ++i) rows.emplace_back(offsets[i], std::move(sequence[i]));

    const auto noise = [&](double fraction, auto mutate) {
      const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
      for (std::size_t i = 0; i < count; ++i) {
        QueryRecord q = base[rng.below(base.size())];
        mutate(q);
        rows.emplace_back(static_cast<std::int64_t>(rng.below(kWindowSeconds)), std::move(q));
      }
    };
    noise(spec.cached_fraction, [](QueryRecord& q) { q.was_cached = true; });
    noise(spec.non_select_fraction, [&](QueryRecord& q) {
      static constexpr QueryType kTypes[] = {QueryType::insert, QueryType::update,
                                             QueryType::del};
      q.query_type = kTypes[rng.below(3)];
    });

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [offset, q] : rows) {
      q.arrival_timestamp = window + seconds{offset};
      q.query_id = fmt::format("q{:08d}", ++query_counter);
      all.push_back(std::move(q));
    }
  }
  return all;
}

void write_synth_trace(std::ostream& out, const SynthSpec& spec) {
  const auto records = synthesize(spec);
  write_trace(out, records);
}

}  // namespace redbench
