#include "redbench/user_sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "redbench/csv.hpp"
#include "redbench/error.hpp"

namespace redbench {

int bucket_of(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw DomainError(fmt::format("repetition rate {} outside [0, 1]", rate));
  }
  // Compare against the edges as written (b / 10.0) so 0.3 lands in bucket 3
  // regardless of how rate * 10 rounds.
  int b = static_cast<int>(std::floor(rate * kBucketCount));
  if (b > 0 && rate < b / static_cast<double>(kBucketCount)) --b;
  if (b < kBucketCount && rate >= (b + 1) / static_cast<double>(kBucketCount)) ++b;
  return std::min(b, kBucketCount - 1);
}

UserProfile profile_user(const UserTrace& trace) {
  UserProfile p;
  p.user_id = trace.user_id;
  const auto hashes = trace.hashes();
  p.repetition_rate = repetition_rate(hashes);
  std::set<std::uint32_t> joins;
  std::set<Scanset> scansets;
  for (const auto& r : trace.records) {
    joins.insert(r.num_joins);
    scansets.insert(r.read_tables);
  }
  p.distinct_join_values = joins.size();
  p.distinct_scansets = scansets.size();
  p.bucket = bucket_of(p.repetition_rate);
  return p;
}

std::vector<VariabilityScore> rank_bucket(std::span<const UserProfile> profiles) {
  const auto n = profiles.size();
  std::vector<VariabilityScore> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i].user_id = profiles[i].user_id;

  auto assign = [&](auto key, std::size_t VariabilityScore::*rank) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto ka = key(profiles[a]);
      const auto kb = key(profiles[b]);
      if (ka != kb) return ka < kb;
      return profiles[a].user_id < profiles[b].user_id;
    });
    for (std::size_t r = 0; r < n; ++r) scores[order[r]].*rank = r + 1;
  };
  assign([](const UserProfile& p) { return p.distinct_join_values; },
         &VariabilityScore::join_rank);
  assign([](const UserProfile& p) { return p.distinct_scansets; },
         &VariabilityScore::scanset_rank);
  return scores;
}

namespace {

std::string role_name(std::size_t slot, std::size_t per_bucket) {
  if (per_bucket == 3) {
    static constexpr std::array<const char*, 3> kRoles = {"lowest", "median", "highest"};
    return kRoles[slot];
  }
  if (per_bucket == 1) return "median";
  return fmt::format("rank{}", slot + 1);
}

}  // namespace

UserSelection select_users(std::span<const UserProfile> profiles, std::size_t per_bucket) {
  if (per_bucket == 0) throw DomainError("users per bucket must be at least 1");
  UserSelection selection;
  std::array<std::vector<UserProfile>, kBucketCount> buckets;
  for (const auto& p : profiles) buckets.at(static_cast<std::size_t>(p.bucket)).push_back(p);

  for (int b = 0; b < kBucketCount; ++b) {
    auto& members = buckets[static_cast<std::size_t>(b)];
    if (members.size() < per_bucket) {
      selection.warnings.push_back(fmt::format(
          "bucket {} has {} user(s), fewer than the {} requested", b, members.size(), per_bucket));
    }
    if (members.empty()) continue;

    const auto scores = rank_bucket(members);
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
      if (scores[a].total() != scores[c].total()) return scores[a].total() < scores[c].total();
      return members[a].user_id < members[c].user_id;
    });

    const std::size_t last = members.size() - 1;
    std::vector<std::size_t> taken;
    for (std::size_t slot = 0; slot < per_bucket; ++slot) {
      // per_bucket == 1 selects the (lower) median.
      const std::size_t position =
          per_bucket == 1 ? last / 2 : slot * last / (per_bucket - 1);
      if (std::find(taken.begin(), taken.end(), position) != taken.end()) continue;
      taken.push_back(position);
      const auto idx = order[position];
      selection.users.push_back(
          SelectedUser{members[idx], role_name(slot, per_bucket), scores[idx].total()});
    }
  }
  return selection;
}

void write_selection(std::ostream& out, const UserSelection& selection) {
  out << "bucket,user_id,role,repetition_rate,total_variability\n";
  for (const auto& u : selection.users) {
    csv::write_row(out, {std::to_string(u.profile.bucket), u.profile.user_id, u.role,
                         fmt::format("{:.6f}", u.profile.repetition_rate),
                         std::to_string(u.total_variability)});
  }
}

}  // namespace redbench
