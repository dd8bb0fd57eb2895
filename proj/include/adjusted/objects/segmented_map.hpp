#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <thread>

#include "adjusted/objects/hash_map.hpp"
#include "adjusted/objects/skip_list_map.hpp"
#include "adjusted/ordering.hpp"
#include "adjusted/segmentation.hpp"

namespace adjusted {

namespace detail {

// Spin latch; uncontended whenever callers respect the CWMR contract.
class Latch {
 public:
  void lock() {
    while (flag_.test_and_set(std::memory_order_acquire)) std::this_thread::yield();
  }
  void unlock() { flag_.clear(std::memory_order_release); }

 private:
  std::atomic_flag flag_ = ATOMIC_FLAG_INIT;
};

}  // namespace detail

/// M2 under CWMR: an Extended segmentation of single-writer maps. A key's
/// segment is recorded on its first put in a write-once route index; later
/// puts, removes and gets from any thread go to that segment only.
template <template <class, class> class Map, class K, class V>
class ExtendedSegmentedMap {
 public:
  static constexpr std::size_t kRouteShards = 64;

  void put(K k, V v) {
    Segment& s = *segs_.segment(route_or_claim(k));
    s.latch.lock();
    s.map.put(k, v);
    s.latch.unlock();
  }

  bool remove(K k) {
    auto r = route(k);
    if (!r) return false;
    Segment& s = *segs_.segment(*r);
    s.latch.lock();
    const bool had = s.map.remove(k);
    s.latch.unlock();
    return had;
  }

  std::optional<V> get(K k) const {
    auto r = route(k);
    if (!r) return std::nullopt;
    return segs_.segment(*r)->map.get(k);
  }

  bool contains(K k) const { return get(k).has_value(); }

  /// Recorded segment of k, if it was ever inserted.
  std::optional<std::size_t> route(K k) const {
    auto r = shard(k).index.get(k);
    if (!r) return std::nullopt;
    return static_cast<std::size_t>(*r);
  }

  std::size_t segments() const { return segs_.size(); }

  template <class F>
  void for_each(F f) const {
    segs_.for_each([&](const Segment& s) { s.map.for_each(f); });
  }

  std::size_t size() const {
    return segs_.template fold_read<std::size_t>(
        0, [](const Segment& s) { return s.map.size(); },
        [](std::size_t a, std::size_t b) { return a + b; });
  }

 private:
  struct Segment {
    Segment() { map.set_serialised_writers(); }
    detail::Latch latch;
    Map<K, V> map;
  };

  struct alignas(ord::kCacheLine) RouteShard {
    RouteShard() { index.set_serialised_writers(); }
    detail::Latch latch;
    SwmrHashMap<K, std::uint32_t> index;
  };

  RouteShard& shard(K k) const {
    return shards_[hash64(static_cast<std::uint64_t>(k)) % kRouteShards];
  }

  std::size_t route_or_claim(K k) {
    if (auto r = route(k)) return *r;
    const std::size_t mine = segs_.write_index();
    RouteShard& sh = shard(k);
    sh.latch.lock();
    auto r = sh.index.get(k);
    if (!r) sh.index.put(k, static_cast<std::uint32_t>(mine));
    sh.latch.unlock();
    return r ? static_cast<std::size_t>(*r) : mine;
  }

  Segmentation<Segment> segs_{SegmentPolicy::Extended};
  mutable RouteShard shards_[kRouteShards];
};

template <class K, class V>
using ExtendedSegmentedHashMap = ExtendedSegmentedMap<SwmrHashMap, K, V>;

template <class K, class V>
using ExtendedSegmentedSkipListMap = ExtendedSegmentedMap<SwmrSkipListMap, K, V>;

}  // namespace adjusted
