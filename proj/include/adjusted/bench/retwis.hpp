#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adjusted/bench/micro.hpp"

namespace adjusted::bench {

enum class RetwisOp : int { AddUser, Follow, Post, Timeline, Group, Profile };
inline constexpr std::size_t kRetwisOps = 6;
const std::array<std::string, kRetwisOps>& retwis_op_names();

/// Default mix in percent, indexed by RetwisOp.
inline constexpr std::array<int, kRetwisOps> kRetwisMix = {5, 5, 15, 60, 5, 10};

struct RetwisConfig {
  std::uint32_t users = 10000;
  double alpha = 1.0;
  std::string variant = "adjusted";  // baseline, adjusted or dap
  int threads = 1;
  double duration = 5;
  double warmup = 2;
  int runs = 5;
  std::size_t batch = 1000;
  std::array<int, kRetwisOps> mix = kRetwisMix;
  std::size_t timeline_cap = 50;
  std::size_t eager_fanout = 32;
  std::uint32_t avg_degree = 8;
  std::uint64_t seed = 1;
  /// Exact per-thread operation count per run, no warmup or timer.
  std::optional<std::uint64_t> max_ops;
};

std::vector<std::string> retwis_variants();

/// Parses "5,5,15,60,5,10". Throws UsageError unless six non-negative
/// integers summing to 100.
std::array<int, kRetwisOps> parse_mix(const std::string& text);

/// Throws UsageError on invalid configurations.
void validate(const RetwisConfig& cfg);

/// Result of the structural checks run after the last run.
struct RetwisAudit {
  bool symmetric = true;         // u follows v iff u is among v's followers
  bool community_profiles = true;
  bool timeline_authors = true;
  bool timeline_cap = true;      // no timeline fetch returned more than the cap
  std::size_t users = 0;
  std::size_t edges = 0;
  std::size_t longest_timeline = 0;
  std::vector<std::string> problems;  // first few violations, for diagnostics

  bool ok() const { return symmetric && community_profiles && timeline_authors && timeline_cap; }
};

struct RetwisResult {
  BenchReport report;
  RetwisAudit audit;
  /// Per-thread digests of (operation, actor, target, outcome) of the last run.
  std::vector<std::uint64_t> digests;
};

RetwisResult retwis_run(const RetwisConfig& cfg);

}  // namespace adjusted::bench
