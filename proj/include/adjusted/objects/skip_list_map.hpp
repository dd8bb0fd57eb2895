#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <shared_mutex>
#include <type_traits>
#include <vector>

#include "adjusted/ordering.hpp"
#include "adjusted/reclaim.hpp"

namespace adjusted {

/// M2 as a single-writer skip list. Insertion links the bottom level first
/// (seq_cst) and then the upper levels (release), so every upper link leads
/// to a node already reachable below. Removal unlinks top-down.
template <class K, class V>
class SwmrSkipListMap {
  static_assert(std::is_trivially_copyable_v<K>);
  static_assert(std::is_trivially_copyable_v<V> && std::atomic<V>::is_always_lock_free);

 public:
  static constexpr int kMaxLevel = 16;

 private:
  struct Node {
    Node(K k, V v, int h) : key(k), value(v), next(static_cast<std::size_t>(h)) {}
    const K key;
    std::atomic<V> value;
    std::vector<std::atomic<Node*>> next;
    int height() const { return static_cast<int>(next.size()); }
  };

 public:
  explicit SwmrSkipListMap(std::uint64_t seed = 0x5eed) : rng_(seed), head_(K{}, V{}, kMaxLevel) {}
  SwmrSkipListMap(const SwmrSkipListMap&) = delete;
  SwmrSkipListMap& operator=(const SwmrSkipListMap&) = delete;
  ~SwmrSkipListMap() {
    Node* n = head_.next[0].load(std::memory_order_relaxed);
    while (n != nullptr) {
      Node* after = n->next[0].load(std::memory_order_relaxed);
      delete n;
      n = after;
    }
  }

  /// Writer only.
  void put(K k, V v) {
    check_writer();
    reclaim::Guard g;
    Node* preds[kMaxLevel];
    Node* found = find_preds(k, preds);
    if (found != nullptr) {
      found->value.store(v, ord::volatile_);
      return;
    }
    const int h = random_height();
    auto* n = new Node(k, v, h);
    for (int i = 0; i < h; ++i)
      n->next[static_cast<std::size_t>(i)].store(preds[i]->next[static_cast<std::size_t>(i)].load(ord::plain),
                                                 ord::plain);
    preds[0]->next[0].store(n, ord::volatile_);
    for (int i = 1; i < h; ++i) preds[i]->next[static_cast<std::size_t>(i)].store(n, ord::release);
    bump_size(1);
  }

  /// Writer only.
  bool remove(K k) {
    check_writer();
    reclaim::Guard g;
    Node* preds[kMaxLevel];
    Node* n = find_preds(k, preds);
    if (n == nullptr) return false;
    for (int i = n->height() - 1; i >= 0; --i) {
      const auto li = static_cast<std::size_t>(i);
      preds[i]->next[li].store(n->next[li].load(ord::plain), i == 0 ? ord::volatile_ : ord::release);
    }
    bump_size(-1);
    reclaim::retire(n);
    return true;
  }

  std::optional<V> get(K k) const {
    reclaim::Guard g;
    const Node* x = &head_;
    for (int i = kMaxLevel - 1; i >= 0; --i) {
      const auto li = static_cast<std::size_t>(i);
      for (Node* nx = x->next[li].load(ord::acquire); nx != nullptr && nx->key < k;
           nx = x->next[li].load(ord::acquire))
        x = nx;
    }
    Node* c = x->next[0].load(ord::volatile_);
    if (c != nullptr && c->key == k) return c->value.load(ord::volatile_);
    return std::nullopt;
  }

  bool contains(K k) const { return get(k).has_value(); }

  std::size_t size() const { return size_.load(ord::plain); }

  /// Writers are serialised externally (e.g. by a latch), so the writer
  /// may change between calls.
  void set_serialised_writers() { serialised_ = true; }

  /// Bottom-level keys in traversal order.
  std::vector<K> keys() const {
    reclaim::Guard g;
    std::vector<K> out;
    for (Node* n = head_.next[0].load(ord::acquire); n != nullptr; n = n->next[0].load(ord::acquire))
      out.push_back(n->key);
    return out;
  }

  /// Quiescent structural check: each level sorted, and every node reached
  /// on level i is also on every level below.
  bool well_formed() const {
    std::vector<const Node*> bottom;
    for (Node* n = head_.next[0].load(ord::acquire); n != nullptr; n = n->next[0].load(ord::acquire))
      bottom.push_back(n);
    for (std::size_t i = 1; i < bottom.size(); ++i)
      if (!(bottom[i - 1]->key < bottom[i]->key)) return false;
    for (int lvl = 1; lvl < kMaxLevel; ++lvl) {
      const auto li = static_cast<std::size_t>(lvl);
      const Node* prev = nullptr;
      for (Node* n = head_.next[li].load(ord::acquire); n != nullptr; n = n->next[li].load(ord::acquire)) {
        if (n->height() <= lvl) return false;
        if (prev != nullptr && !(prev->key < n->key)) return false;
        bool below = false;
        for (const Node* b : bottom) below = below || b == n;
        if (!below) return false;
        prev = n;
      }
    }
    return true;
  }

 private:
  Node* find_preds(K k, Node** preds) {
    Node* x = &head_;
    for (int i = kMaxLevel - 1; i >= 0; --i) {
      const auto li = static_cast<std::size_t>(i);
      for (Node* nx = x->next[li].load(ord::plain); nx != nullptr && nx->key < k;
           nx = x->next[li].load(ord::plain))
        x = nx;
      preds[i] = x;
    }
    Node* c = x->next[0].load(ord::plain);
    return c != nullptr && c->key == k ? c : nullptr;
  }

  int random_height() {
    int h = 1;
    while (h < kMaxLevel && (rng_() & 1)) ++h;
    return h;
  }

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

  std::mt19937_64 rng_;
  Node head_;
  std::atomic<std::size_t> size_{0};  // written by the writer only
  bool serialised_ = false;
#ifndef NDEBUG
  std::atomic<std::uint64_t> writer_{0};
#endif
};

/// Baseline: ordered map behind a reader-writer lock.
template <class K, class V>
class LockedOrderedMap {
 public:
  void put(K k, V v) {
    std::unique_lock lk(mu_);
    map_[k] = v;
  }
  bool remove(K k) {
    std::unique_lock lk(mu_);
    return map_.erase(k) > 0;
  }
  std::optional<V> get(K k) const {
    std::shared_lock lk(mu_);
    auto it = map_.find(k);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(K k) const { return get(k).has_value(); }

 private:
  mutable std::shared_mutex mu_;
  std::map<K, V> map_;
};

}  // namespace adjusted
