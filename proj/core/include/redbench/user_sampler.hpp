#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "redbench/trace_model.hpp"

namespace redbench {

inline constexpr int kBucketCount = 10;

/// Repetition-rate bucket: [0, 0.1) -> 0, ..., [0.9, 1.0] -> 9.
/// Throws DomainError for rates outside [0, 1].
int bucket_of(double rate);

struct UserProfile {
  std::string user_id;
  double repetition_rate = 0.0;
  std::size_t distinct_join_values = 0;
  std::size_t distinct_scansets = 0;
  int bucket = 0;
};

UserProfile profile_user(const UserTrace& trace);

struct VariabilityScore {
  std::string user_id;
  std::size_t join_rank = 0;
  std::size_t scanset_rank = 0;
  std::size_t total() const noexcept { return join_rank + scanset_rank; }
};

/// Ordinal ranks (1-based) within one bucket by ascending distinct join
/// values and distinct scansets; ties go to the smaller user_id. The result
/// follows the order of `profiles`.
std::vector<VariabilityScore> rank_bucket(std::span<const UserProfile> profiles);

struct SelectedUser {
  UserProfile profile;
  std::string role;  // lowest | median | highest (or rank<N> for other counts)
  std::size_t total_variability = 0;
};

struct UserSelection {
  /// Ordered by bucket, then role position.
  std::vector<SelectedUser> users;
  std::vector<std::string> warnings;
};

/// Per bucket, sorts users by (total variability, user_id) and picks
/// `per_bucket` evenly spaced positions: for three that is the lowest, the
/// lower median and the highest. Positions that coincide are collapsed.
UserSelection select_users(std::span<const UserProfile> profiles, std::size_t per_bucket = 3);

/// `bucket,user_id,role,repetition_rate,total_variability`.
void write_selection(std::ostream& out, const UserSelection& selection);

}  // namespace redbench
