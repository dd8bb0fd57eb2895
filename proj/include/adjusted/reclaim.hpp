#pragma once

// Dense thread slots and epoch-based reclamation for the node-based objects.
//
// Readers wrap traversals in a Guard; writers retire unlinked nodes, which
// are freed once every thread active at retirement time has left its guard.

#include <cstddef>
#include <cstdint>

namespace adjusted {

inline constexpr int kMaxThreadSlots = 1024;

/// Small dense id of the calling thread, stable for the thread's lifetime.
/// Ids of exited threads are reused by later threads.
int thread_slot();

/// Unique, never reused id of the calling thread (starts at 1).
std::uint64_t thread_serial();

/// Highest slot ever handed out, plus one.
int thread_slot_high_water();

namespace reclaim {

class Guard {
 public:
  Guard();
  ~Guard();
  Guard(const Guard&) = delete;
  Guard& operator=(const Guard&) = delete;
};

using Deleter = void (*)(void*);

/// Schedules p for deletion. Must be called after p became unreachable for
/// new readers.
void retire(void* p, Deleter d);

template <class T>
void retire(T* p) {
  retire(static_cast<void*>(p), [](void* q) { delete static_cast<T*>(q); });
}

/// Tries to advance the epoch and free what the calling thread may free.
void collect();

/// Frees every pending node. Only valid when no other thread is inside a
/// Guard or retiring (e.g. after joining all workers).
void drain_quiescent();

std::size_t pending();

}  // namespace reclaim
}  // namespace adjusted
