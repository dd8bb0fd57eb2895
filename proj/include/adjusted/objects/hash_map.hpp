#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "adjusted/ordering.hpp"
#include "adjusted/reclaim.hpp"
#include "adjusted/segmentation.hpp"

namespace adjusted {

/// M2 with one writer and many readers. Chained bins; a new node is linked
/// at the head of its bin with a release store, value overwrites are seq_cst.
/// The writer resizes at load factor 0.75 by copying every node into a new
/// table, publishing it, and retiring the old table and nodes.
template <class K, class V>
class SwmrHashMap {
  static_assert(std::is_integral_v<K>);
  static_assert(std::is_trivially_copyable_v<V> && std::atomic<V>::is_always_lock_free);

  struct Node {
    Node(K k, V v, Node* n) : key(k), value(v), next(n) {}
    const K key;
    std::atomic<V> value;
    std::atomic<Node*> next;
  };

  struct Table {
    explicit Table(std::size_t n) : mask(n - 1), bins(new std::atomic<Node*>[n]) {
      for (std::size_t i = 0; i < n; ++i) bins[i].store(nullptr, std::memory_order_relaxed);
    }
    std::size_t mask;
    std::unique_ptr<std::atomic<Node*>[]> bins;
    std::atomic<Node*>& bin(K k) { return bins[hash64(static_cast<std::uint64_t>(k)) & mask]; }
  };

 public:
  static constexpr std::size_t kInitialBins = 16;

  SwmrHashMap() { table_.store(new Table(kInitialBins), std::memory_order_relaxed); }
  SwmrHashMap(const SwmrHashMap&) = delete;
  SwmrHashMap& operator=(const SwmrHashMap&) = delete;
  ~SwmrHashMap() {
    Table* t = table_.load(std::memory_order_relaxed);
    free_nodes(t);
    delete t;
  }

  /// Writer only.
  void put(K k, V v) {
    check_writer();
    reclaim::Guard g;
    Table* t = table_.load(ord::plain);
    auto& bin = t->bin(k);
    for (Node* n = bin.load(ord::plain); n != nullptr; n = n->next.load(ord::plain)) {
      if (n->key == k) {
        n->value.store(v, ord::volatile_);
        return;
      }
    }
    bin.store(new Node(k, v, bin.load(ord::plain)), ord::release);
    bump_size(1);
    if (size_.load(ord::plain) * 4 > (t->mask + 1) * 3) resize(t);
  }

  /// Writer only. Returns whether k was present.
  bool remove(K k) {
    check_writer();
    reclaim::Guard g;
    Table* t = table_.load(ord::plain);
    std::atomic<Node*>* link = &t->bin(k);
    for (Node* n = link->load(ord::plain); n != nullptr; n = link->load(ord::plain)) {
      if (n->key == k) {
        link->store(n->next.load(ord::plain), ord::release);
        bump_size(-1);
        reclaim::retire(n);
        return true;
      }
      link = &n->next;
    }
    return false;
  }

  std::optional<V> get(K k) const {
    reclaim::Guard g;
    Table* t = table_.load(ord::acquire);
    for (Node* n = t->bin(k).load(ord::acquire); n != nullptr; n = n->next.load(ord::acquire)) {
      if (n->key == k) return n->value.load(ord::volatile_);
    }
    return std::nullopt;
  }

  bool contains(K k) const { return get(k).has_value(); }

  /// Writer's view; exact when called by the writer or at quiescence.
  std::size_t size() const { return size_.load(ord::plain); }

  /// Writers are serialised externally (e.g. by a latch), so the writer
  /// may change between calls.
  void set_serialised_writers() { serialised_ = true; }
  std::size_t bins() const { return table_.load(ord::acquire)->mask + 1; }

  template <class F>
  void for_each(F f) const {
    reclaim::Guard g;
    Table* t = table_.load(ord::acquire);
    for (std::size_t i = 0; i <= t->mask; ++i)
      for (Node* n = t->bins[i].load(ord::acquire); n != nullptr; n = n->next.load(ord::acquire))
        f(n->key, n->value.load(ord::acquire));
  }

  /// Visits entries until f returns false; returns false if stopped early.
  template <class F>
  bool for_each_while(F f) const {
    reclaim::Guard g;
    Table* t = table_.load(ord::acquire);
    for (std::size_t i = 0; i <= t->mask; ++i)
      for (Node* n = t->bins[i].load(ord::acquire); n != nullptr; n = n->next.load(ord::acquire))
        if (!f(n->key, n->value.load(ord::acquire))) return false;
    return true;
  }

 private:
  void bump_size(int d) {
    size_.store(size_.load(ord::plain) + static_cast<std::size_t>(d), ord::plain);
  }

  void check_writer() {
#ifndef NDEBUG
    if (serialised_) return;
    std::uint64_t expected = 0;
    const std::uint64_t me = thread_serial();
    writer_.compare_exchange_strong(expected, me, std::memory_order_relaxed);
    assert((expected == 0 || expected == me) && "write from a second thread");
#endif
  }

  void resize(Table* old) {
    auto* next = new Table((old->mask + 1) * 2);
    for (std::size_t i = 0; i <= old->mask; ++i) {
      for (Node* n = old->bins[i].load(ord::plain); n != nullptr; n = n->next.load(ord::plain)) {
        auto& bin = next->bin(n->key);
        bin.store(new Node(n->key, n->value.load(ord::plain), bin.load(ord::plain)), ord::plain);
      }
    }
    table_.store(next, ord::release);
    for (std::size_t i = 0; i <= old->mask; ++i) {
      Node* n = old->bins[i].load(ord::plain);
      while (n != nullptr) {
        Node* after = n->next.load(ord::plain);
        reclaim::retire(n);
        n = after;
      }
    }
    reclaim::retire(old);
  }

  static void free_nodes(Table* t) {
    for (std::size_t i = 0; i <= t->mask; ++i) {
      Node* n = t->bins[i].load(std::memory_order_relaxed);
      while (n != nullptr) {
        Node* after = n->next.load(std::memory_order_relaxed);
        delete n;
        n = after;
      }
    }
  }

  std::atomic<Table*> table_{nullptr};
  std::atomic<std::size_t> size_{0};  // written by the writer only
  bool serialised_ = false;
#ifndef NDEBUG
  std::atomic<std::uint64_t> writer_{0};
#endif
};

/// Baseline: lock-striped hash map (readers share, writers exclude per stripe).
template <class K, class V>
class StripedHashMap {
 public:
  static constexpr std::size_t kStripes = 64;

  void put(K k, V v) {
    auto& s = stripe(k);
    std::unique_lock lk(s.mu);
    s.map[k] = v;
  }
  bool remove(K k) {
    auto& s = stripe(k);
    std::unique_lock lk(s.mu);
    return s.map.erase(k) > 0;
  }
  std::optional<V> get(K k) const {
    auto& s = stripe(k);
    std::shared_lock lk(s.mu);
    auto it = s.map.find(k);
    if (it == s.map.end()) return std::nullopt;
    return it->second;
  }
  bool contains(K k) const { return get(k).has_value(); }

  template <class F>
  void for_each(F f) const {
    for (auto& s : stripes_) {
      std::shared_lock lk(s.mu);
      for (const auto& [k, v] : s.map) f(k, v);
    }
  }

 private:
  struct alignas(ord::kCacheLine) Stripe {
    mutable std::shared_mutex mu;
    std::unordered_map<K, V> map;
  };
  Stripe& stripe(K k) const {
    return stripes_[hash64(static_cast<std::uint64_t>(k)) % kStripes];
  }
  mutable Stripe stripes_[kStripes];
};

}  // namespace adjusted
