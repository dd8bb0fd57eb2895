#include "adjusted/bench/social_graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_set>

#include "adjusted/bench/zipf.hpp"
#include "adjusted/seqspec.hpp"

namespace adjusted::bench {

std::vector<std::uint32_t> SocialGraph::in_degrees() const {
  std::vector<std::uint32_t> d(users, 0);
  for (const auto& e : edges) ++d[e.second];
  return d;
}

std::vector<std::uint32_t> SocialGraph::out_degrees() const {
  std::vector<std::uint32_t> d(users, 0);
  for (const auto& e : edges) ++d[e.first];
  return d;
}

SocialGraph build_social_graph(std::uint32_t users, double alpha, std::uint64_t seed,
                               std::uint32_t avg_degree) {
  if (users < 2) throw UsageError("social graph needs at least 2 users");
  if (!(alpha > 0 && alpha <= 1)) throw UsageError("alpha must be in (0, 1]");
  std::mt19937_64 rng(seed);
  SocialGraph g;
  g.users = users;
  g.popular.resize(users);
  std::iota(g.popular.begin(), g.popular.end(), 0u);
  std::shuffle(g.popular.begin(), g.popular.end(), rng);
  g.active = g.popular;
  std::shuffle(g.active.begin(), g.active.end(), rng);

  const ZipfSampler zipf(users, zipf_exponent(alpha));
  std::unordered_set<std::uint64_t> seen;
  const std::uint64_t stubs = std::uint64_t{users} * avg_degree;
  seen.reserve(stubs);
  for (std::uint64_t i = 0; i < stubs; ++i) {
    const std::uint32_t followee = g.popular[zipf(rng) - 1];
    for (int attempt = 0; attempt < 8; ++attempt) {
      const std::uint32_t follower = g.active[zipf(rng) - 1];
      if (follower == followee) continue;
      if (seen.insert(std::uint64_t{follower} << 32 | followee).second) {
        g.edges.emplace_back(follower, followee);
        break;
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

}  // namespace adjusted::bench
