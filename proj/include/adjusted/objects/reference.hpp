#pragma once

#include <atomic>
#include <optional>

#include "adjusted/ordering.hpp"

namespace adjusted {

/// R2: a reference written at most once. The slot is published with a
/// seq_cst CAS; readers go through a Handle that caches the value in a
/// plain field after the first non-empty read.
template <class T>
class WriteOnceReference {
 public:
  WriteOnceReference() = default;
  WriteOnceReference(const WriteOnceReference&) = delete;
  WriteOnceReference& operator=(const WriteOnceReference&) = delete;
  ~WriteOnceReference() { delete slot_.load(std::memory_order_relaxed); }

  /// True iff this call performed the unique unset -> set transition.
  bool set(T v) {
    if (slot_.load(ord::acquire) != nullptr) return false;
    auto* fresh = new T(std::move(v));
    T* expected = nullptr;
    if (slot_.compare_exchange_strong(expected, fresh, ord::volatile_)) return true;
    delete fresh;
    return false;
  }

  /// Uncached read.
  const T* get() const { return slot_.load(ord::volatile_); }

  class Handle {
   public:
    explicit Handle(const WriteOnceReference& ref) : ref_(&ref) {}

    const T* get() {
      if (cache_ != nullptr) return cache_;
      cache_ = ref_->get();
      return cache_;
    }

   private:
    const WriteOnceReference* ref_;
    const T* cache_ = nullptr;  // plain: the slot never changes once set
  };

  Handle handle() const { return Handle(*this); }

 private:
  std::atomic<T*> slot_{nullptr};
};

/// Baseline R1: every get and set is a seq_cst access to a shared word.
template <class T>
class ScReference {
  static_assert(std::atomic<T>::is_always_lock_free);

 public:
  explicit ScReference(T init = T{}) : v_(init) {}
  void set(T v) { v_.store(v, ord::volatile_); }
  T get() const { return v_.load(ord::volatile_); }

 private:
  alignas(ord::kCacheLine) std::atomic<T> v_;
};

}  // namespace adjusted
