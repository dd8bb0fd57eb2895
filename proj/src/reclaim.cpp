#include "adjusted/reclaim.hpp"

#include <atomic>
#include <cstdlib>
#include <cstdio>
#include <mutex>
#include <vector>

#include "adjusted/ordering.hpp"

namespace adjusted {
namespace {

// --- slots ------------------------------------------------------------------

std::mutex g_slot_mu;
std::vector<int> g_free_slots;
std::atomic<int> g_high_water{0};

struct SlotOwner {
  int id = -1;
  SlotOwner() {
    std::lock_guard lk(g_slot_mu);
    if (!g_free_slots.empty()) {
      id = g_free_slots.back();
      g_free_slots.pop_back();
      return;
    }
    id = g_high_water.load(std::memory_order_relaxed);
    if (id >= kMaxThreadSlots) {
      std::fprintf(stderr, "adjusted: more than %d live threads\n", kMaxThreadSlots);
      std::abort();
    }
    g_high_water.store(id + 1, std::memory_order_release);
  }
  ~SlotOwner() {
    std::lock_guard lk(g_slot_mu);
    g_free_slots.push_back(id);
  }
};

// --- epochs -----------------------------------------------------------------

constexpr std::uint64_t kActive = 1;
constexpr std::size_t kCollectEvery = 64;

struct Retired {
  void* p;
  reclaim::Deleter d;
  std::uint64_t epoch;
};

struct alignas(ord::kCacheLine) Record {
  std::atomic<std::uint64_t> announce{0};  // epoch << 1 | active
  int depth = 0;
  std::size_t since_collect = 0;
  std::vector<Retired> bag;
};

std::atomic<std::uint64_t> g_epoch{2};
Record g_records[kMaxThreadSlots];
std::atomic<std::size_t> g_pending{0};

bool try_advance() {
  const std::uint64_t e = g_epoch.load(std::memory_order_seq_cst);
  const int n = g_high_water.load(std::memory_order_acquire);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t a = g_records[i].announce.load(std::memory_order_seq_cst);
    if ((a & kActive) && (a >> 1) != e) return false;
  }
  std::uint64_t expected = e;
  return g_epoch.compare_exchange_strong(expected, e + 1, std::memory_order_seq_cst);
}

void free_safe(Record& r) {
  const std::uint64_t e = g_epoch.load(std::memory_order_seq_cst);
  std::size_t kept = 0;
  for (auto& item : r.bag) {
    if (item.epoch + 2 <= e) {
      item.d(item.p);
      g_pending.fetch_sub(1, std::memory_order_relaxed);
    } else {
      r.bag[kept++] = item;
    }
  }
  r.bag.resize(kept);
}

struct Cleanup {
  ~Cleanup() { reclaim::drain_quiescent(); }
} g_cleanup;

}  // namespace

int thread_slot() {
  thread_local SlotOwner owner;
  return owner.id;
}

std::uint64_t thread_serial() {
  static std::atomic<std::uint64_t> next{1};
  thread_local const std::uint64_t serial = next.fetch_add(1, std::memory_order_relaxed);
  return serial;
}

int thread_slot_high_water() { return g_high_water.load(std::memory_order_acquire); }

namespace reclaim {

Guard::Guard() {
  Record& r = g_records[thread_slot()];
  if (r.depth++ > 0) return;
  std::uint64_t e;
  do {
    e = g_epoch.load(std::memory_order_seq_cst);
    r.announce.store(e << 1 | kActive, std::memory_order_seq_cst);
  } while (g_epoch.load(std::memory_order_seq_cst) != e);
}

Guard::~Guard() {
  Record& r = g_records[thread_slot()];
  if (--r.depth > 0) return;
  r.announce.store(r.announce.load(std::memory_order_relaxed) & ~kActive, std::memory_order_release);
}

void retire(void* p, Deleter d) {
  Record& r = g_records[thread_slot()];
  r.bag.push_back({p, d, g_epoch.load(std::memory_order_seq_cst)});
  g_pending.fetch_add(1, std::memory_order_relaxed);
  if (++r.since_collect >= kCollectEvery) {
    r.since_collect = 0;
    collect();
  }
}

void collect() {
  Record& r = g_records[thread_slot()];
  try_advance();
  free_safe(r);
}

void drain_quiescent() {
  for (auto& r : g_records) {
    for (auto& item : r.bag) item.d(item.p);
    g_pending.fetch_sub(r.bag.size(), std::memory_order_relaxed);
    r.bag.clear();
  }
}

std::size_t pending() { return g_pending.load(std::memory_order_relaxed); }

}  // namespace reclaim
}  // namespace adjusted
