#pragma once

// Start gate, phases and per-thread accounting shared by the benchmarks.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adjusted/bench/micro.hpp"
#include "adjusted/ordering.hpp"

namespace adjusted::bench {

using Clock = std::chrono::steady_clock;

enum class Phase : int { Setup, Warmup, Measure, Stop };

struct alignas(ord::kCacheLine) WorkerStats {
  std::uint64_t ops = 0;
  std::vector<std::uint64_t> mix;
  Clock::time_point first{};
  Clock::time_point last{};
  bool started = false;
  double excluded = 0;  // seconds spent in unmeasured work inside the window
};

struct RunTiming {
  double warmup = 0;
  double duration = 0;
  std::size_t batch = 1000;
  std::optional<std::uint64_t> max_ops;
};

/// Runs one measured run. `setup(t)` runs on each worker before the gate;
/// `batch(t, n, stats, measured)` executes n operations; `done(t)`, if set,
/// runs when worker t leaves its loop.
void run_workers(int threads, const RunTiming& timing, std::size_t kinds,
                 const std::function<void(int)>& setup,
                 const std::function<void(int, std::size_t, WorkerStats&, bool)>& batch,
                 std::vector<WorkerStats>& out, const std::function<void(int)>& done = {});

/// Keeps a computed value alive without storing it anywhere.
inline void keep(std::uint64_t v) { asm volatile("" : : "r"(v)); }

/// Appends one sample per thread for the run and adds the mix counts.
void collect_run(BenchReport& r, int run, const std::vector<WorkerStats>& stats,
                 const std::vector<std::string>& kind_names);

}  // namespace adjusted::bench
