#pragma once

#include <atomic>
#include <cstdint>
#include <thread>

#include "adjusted/ordering.hpp"
#include "adjusted/segmentation.hpp"

namespace adjusted {

/// C3 counter over per-thread cells. inc is a plain-ordered read of the
/// caller's own cell followed by a release store; read sums acquire loads.
class IncrementOnlyCounter {
 public:
  void inc(std::int64_t delta = 1) {
    auto& c = cells_.segment_for_write();
    c.v.store(c.v.load(ord::plain) + delta, ord::release);
  }

  std::int64_t read() const {
    return cells_.fold_read<std::int64_t>(
        0, [](const Cell& c) { return c.v.load(ord::acquire); },
        [](std::int64_t a, std::int64_t b) { return a + b; });
  }

  std::size_t segments() const { return cells_.size(); }

 private:
  struct alignas(ord::kCacheLine) Cell {
    std::atomic<std::int64_t> v{0};
  };
  Segmentation<Cell> cells_{SegmentPolicy::Base};
};

/// Baseline: one shared word, fetch-and-add.
class CasCounter {
 public:
  std::int64_t inc(std::int64_t delta = 1) { return v_.fetch_add(delta, ord::volatile_) + delta; }
  std::int64_t read() const { return v_.load(ord::volatile_); }

 private:
  alignas(ord::kCacheLine) std::atomic<std::int64_t> v_{0};
};

/// Deliberately broken: the increment is a separate load and store with a
/// yield in between, so concurrent incs can be lost.
class BrokenCounter {
 public:
  std::int64_t inc(std::int64_t delta = 1) {
    const std::int64_t seen = v_.load(std::memory_order_relaxed);
    std::this_thread::yield();
    v_.store(seen + delta, std::memory_order_relaxed);
    return seen + delta;
  }
  std::int64_t read() const { return v_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::int64_t> v_{0};
};

}  // namespace adjusted
