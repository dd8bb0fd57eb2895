#pragma once

// Arrays of single-writer segments. Writers touch only their own segment;
// readers snapshot the segment array and fold over it.

#include <atomic>
#include <cassert>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "adjusted/ordering.hpp"
#include "adjusted/reclaim.hpp"

namespace adjusted {

enum class SegmentPolicy : std::uint8_t { Base, Hash, Extended };

/// Seedless 64-bit mixer (splitmix64 finaliser).
inline std::uint64_t hash64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline std::size_t default_hash_segments() {
  const unsigned hw = std::thread::hardware_concurrency();
  return 2 * static_cast<std::size_t>(hw == 0 ? 1 : hw);
}

template <class Seg>
class Segmentation {
 public:
  using Factory = std::function<std::unique_ptr<Seg>()>;

  explicit Segmentation(SegmentPolicy policy = SegmentPolicy::Base, std::size_t hash_segments = 0,
                        Factory make = [] { return std::make_unique<Seg>(); })
      : policy_(policy), make_(std::move(make)) {
    auto* a = new Array;
    arrays_.emplace_back(a);
    array_.store(a, std::memory_order_release);
    if (policy_ == SegmentPolicy::Hash) {
      if (hash_segments == 0) hash_segments = default_hash_segments();
      std::lock_guard lk(mu_);
      for (std::size_t i = 0; i < hash_segments; ++i) grow_locked(0);
    }
  }

  Segmentation(const Segmentation&) = delete;
  Segmentation& operator=(const Segmentation&) = delete;

  SegmentPolicy policy() const { return policy_; }

  /// The calling thread's own segment (Base / Extended), registering it on
  /// first use.
  Seg& segment_for_write() { return *segment(write_index()); }

  std::size_t write_index() {
    // A slot reused by a later thread carries a different serial, so the
    // new thread gets a fresh segment and the old one stops changing.
    const std::uint64_t serial = thread_serial();
    Route& r = route_[thread_slot()];
    if (r.serial.load(std::memory_order_relaxed) != serial) {
      std::lock_guard lk(mu_);
      r.index.store(grow_locked(serial), std::memory_order_relaxed);
      r.serial.store(serial, std::memory_order_relaxed);
    }
    const std::size_t idx = r.index.load(std::memory_order_relaxed);
    assert(array_.load(ord::acquire)->owners[idx] == serial);
    return idx;
  }

  /// Hash policy: index from the item's 64-bit hash.
  std::size_t segment_for_hash(std::uint64_t h) const {
    return static_cast<std::size_t>(h % size());
  }

  std::size_t size() const { return array_.load(ord::acquire)->segs.size(); }

  /// Valid for any index below a size() observed earlier.
  Seg* segment(std::size_t i) const { return array_.load(ord::acquire)->segs[i]; }

  /// Serial of the thread owning segment i, 0 for unowned (Hash) segments.
  std::uint64_t writer_of(std::size_t i) const { return array_.load(ord::acquire)->owners[i]; }

  /// Folds summary(seg) over one snapshot of the array.
  template <class T, class Summary, class Combine>
  T fold_read(T identity, Summary summary, Combine combine) const {
    const Array* a = array_.load(ord::acquire);
    T acc = identity;
    for (const Seg* s : a->segs) acc = combine(acc, summary(*s));
    return acc;
  }

  template <class F>
  void for_each(F f) const {
    const Array* a = array_.load(ord::acquire);
    for (Seg* s : a->segs) f(*s);
  }

 private:
  struct Array {
    std::vector<Seg*> segs;
    std::vector<std::uint64_t> owners;
  };

  struct Route {
    std::atomic<std::uint64_t> serial{0};
    std::atomic<std::size_t> index{0};
  };

  std::size_t grow_locked(std::uint64_t owner) {
    const Array* old = array_.load(std::memory_order_relaxed);
    auto* next = new Array{*old};
    owned_.push_back(make_());
    next->segs.push_back(owned_.back().get());
    next->owners.push_back(owner);
    arrays_.emplace_back(next);
    array_.store(next, ord::release);
    return next->segs.size() - 1;
  }

  SegmentPolicy policy_;
  Factory make_;
  mutable std::mutex mu_;
  std::vector<std::unique_ptr<Seg>> owned_;
  // Every published array stays alive until destruction, so readers never
  // need a guard for the snapshot.
  std::vector<std::unique_ptr<Array>> arrays_;
  std::atomic<const Array*> array_{nullptr};
  Route route_[kMaxThreadSlots];
};

}  // namespace adjusted
