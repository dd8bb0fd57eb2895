#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace adjusted::bench {

/// Directed follow graph over users 0..users-1.
struct SocialGraph {
  std::uint32_t users = 0;
  /// (follower, followee), sorted, no duplicates, no self loops.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  /// Users ordered by popularity: popular[0] attracts the most followers.
  std::vector<std::uint32_t> popular;
  /// Users ordered by activity: active[0] follows the most users.
  std::vector<std::uint32_t> active;

  std::vector<std::uint32_t> in_degrees() const;
  std::vector<std::uint32_t> out_degrees() const;
};

/// Both endpoints of each of users * avg_degree edge stubs are drawn from a
/// Zipf law (exponent zipf_exponent(alpha)) over seeded permutations of the
/// users. A stub that lands on a self loop or an existing edge redraws its
/// follower, up to a few times, then is dropped. Throws UsageError if
/// users < 2 or alpha is outside (0, 1].
SocialGraph build_social_graph(std::uint32_t users, double alpha, std::uint64_t seed,
                               std::uint32_t avg_degree = 8);

}  // namespace adjusted::bench
