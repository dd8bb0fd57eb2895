#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <optional>

#include "adjusted/ordering.hpp"
#include "adjusted/reclaim.hpp"

namespace adjusted {

namespace detail {

template <class T>
struct QNode {
  QNode() = default;
  explicit QNode(const T& v) : value(v) {}
  T value{};
  std::atomic<QNode*> next{nullptr};
};

// Appends n after the current last node (lock-free, helps a lagging tail).
template <class T>
void link_last(std::atomic<QNode<T>*>& tail, QNode<T>* n) {
  while (true) {
    QNode<T>* t = tail.load(ord::acquire);
    QNode<T>* next = t->next.load(ord::acquire);
    if (next == nullptr) {
      if (t->next.compare_exchange_weak(next, n, ord::volatile_, ord::acquire)) {
        tail.compare_exchange_strong(t, n, ord::release, ord::plain);
        return;
      }
    } else {
      tail.compare_exchange_weak(t, next, ord::release, ord::plain);
    }
  }
}

template <class T>
bool scan_contains(const QNode<T>* dummy, const T& v) {
  for (const QNode<T>* n = dummy->next.load(ord::acquire); n != nullptr;
       n = n->next.load(ord::acquire)) {
    if (n->value == v) return true;
  }
  return false;
}

template <class T, class F>
void scan(const QNode<T>* dummy, F& f) {
  for (const QNode<T>* n = dummy->next.load(ord::acquire); n != nullptr;
       n = n->next.load(ord::acquire)) {
    f(n->value);
  }
}

}  // namespace detail

/// Q1 with many producers and one consumer. offer links at the tail with a
/// CAS; poll moves head with a plain release store, no CAS. The node at
/// head is a dummy whose value was already consumed.
template <class T>
class MpscQueue {
  using Node = detail::QNode<T>;

 public:
  MpscQueue() {
    auto* d = new Node;
    head_.store(d, std::memory_order_relaxed);
    tail_.store(d, std::memory_order_relaxed);
  }
  MpscQueue(const MpscQueue&) = delete;
  MpscQueue& operator=(const MpscQueue&) = delete;
  ~MpscQueue() {
    Node* n = head_.load(std::memory_order_relaxed);
    while (n != nullptr) {
      Node* next = n->next.load(std::memory_order_relaxed);
      delete n;
      n = next;
    }
  }

  void offer(const T& v) {
    reclaim::Guard g;
    detail::link_last(tail_, new Node(v));
  }

  /// Consumer only.
  std::optional<T> poll() {
#ifndef NDEBUG
    check_consumer();
#endif
    reclaim::Guard g;
    Node* h = head_.load(ord::plain);
    Node* next = h->next.load(ord::acquire);
    if (next == nullptr) return std::nullopt;
    T out = next->value;  // copied: concurrent contains may still read it
    head_.store(next, ord::release);
    // A lagging tail may still name h; move it past before retiring h.
    Node* t = h;
    tail_.compare_exchange_strong(t, next, ord::release, ord::plain);
    reclaim::retire(h);
    return out;
  }

  /// Best-effort traversal, like a JUC iterator.
  bool contains(const T& v) const {
    reclaim::Guard g;
    return detail::scan_contains(head_.load(ord::acquire), v);
  }

  template <class F>
  void for_each(F f) const {
    reclaim::Guard g;
    detail::scan(head_.load(ord::acquire), f);
  }

  bool empty() const {
    reclaim::Guard g;
    return head_.load(ord::acquire)->next.load(ord::acquire) == nullptr;
  }

 private:
#ifndef NDEBUG
  void check_consumer() {
    std::uint64_t expected = 0;
    const std::uint64_t me = thread_serial();
    consumer_.compare_exchange_strong(expected, me, std::memory_order_relaxed);
    assert((expected == 0 || expected == me) && "poll from a second consumer");
  }
  std::atomic<std::uint64_t> consumer_{0};
#endif

  alignas(ord::kCacheLine) std::atomic<Node*> head_;
  alignas(ord::kCacheLine) std::atomic<Node*> tail_;
};

/// Baseline: Michael-Scott queue, CAS on both ends.
template <class T>
class MpmcQueue {
  using Node = detail::QNode<T>;

 public:
  MpmcQueue() {
    auto* d = new Node;
    head_.store(d, std::memory_order_relaxed);
    tail_.store(d, std::memory_order_relaxed);
  }
  MpmcQueue(const MpmcQueue&) = delete;
  MpmcQueue& operator=(const MpmcQueue&) = delete;
  ~MpmcQueue() {
    Node* n = head_.load(std::memory_order_relaxed);
    while (n != nullptr) {
      Node* next = n->next.load(std::memory_order_relaxed);
      delete n;
      n = next;
    }
  }

  void offer(const T& v) {
    reclaim::Guard g;
    detail::link_last(tail_, new Node(v));
  }

  std::optional<T> poll() {
    reclaim::Guard g;
    while (true) {
      Node* h = head_.load(ord::volatile_);
      Node* t = tail_.load(ord::volatile_);
      Node* next = h->next.load(ord::volatile_);
      if (h != head_.load(ord::volatile_)) continue;
      if (next == nullptr) return std::nullopt;
      if (h == t) {
        tail_.compare_exchange_weak(t, next, ord::volatile_);
        continue;
      }
      T out = next->value;
      if (head_.compare_exchange_weak(h, next, ord::volatile_)) {
        reclaim::retire(h);
        return out;
      }
    }
  }

  bool contains(const T& v) const {
    reclaim::Guard g;
    return detail::scan_contains(head_.load(ord::acquire), v);
  }

  template <class F>
  void for_each(F f) const {
    reclaim::Guard g;
    detail::scan(head_.load(ord::acquire), f);
  }

 private:
  alignas(ord::kCacheLine) std::atomic<Node*> head_;
  alignas(ord::kCacheLine) std::atomic<Node*> tail_;
};

}  // namespace adjusted
