#include <doctest.h>

#include <atomic>
#include <set>
#include <thread>
#include <vector>

#include "adjusted/objects/segmented_map.hpp"
#include "adjusted/reclaim.hpp"
#include "adjusted/segmentation.hpp"

using namespace adjusted;

namespace {

struct Cell {
  std::atomic<std::int64_t> v{0};
};

std::int64_t sum(const Segmentation<Cell>& s) {
  return s.fold_read<std::int64_t>(
      0, [](const Cell& c) { return c.v.load(); }, [](std::int64_t a, std::int64_t b) { return a + b; });
}

}  // namespace

TEST_CASE("base policy: one segment per thread, stable") {
  Segmentation<Cell> seg;
  const std::size_t mine = seg.write_index();
  CHECK(seg.write_index() == mine);
  std::size_t other = mine;
  std::thread([&] { other = seg.write_index(); }).join();
  CHECK(other != mine);
  CHECK(seg.size() == 2);
  CHECK(seg.writer_of(mine) == thread_serial());
  CHECK(seg.writer_of(other) != thread_serial());
}

TEST_CASE("a reused thread slot gets a fresh segment") {
  Segmentation<Cell> seg;
  std::set<std::size_t> seen;
  for (int i = 0; i < 5; ++i) {
    std::size_t idx = 0;
    std::thread([&] { idx = seg.write_index(); }).join();
    seen.insert(idx);
  }
  CHECK(seen.size() == 5);
  std::set<std::uint64_t> writers;
  for (std::size_t i = 0; i < seg.size(); ++i) writers.insert(seg.writer_of(i));
  CHECK(writers.size() == seg.size());
}

TEST_CASE("fold_read") {
  SUBCASE("empty segmentation gives the identity") {
    Segmentation<Cell> seg;
    CHECK(sum(seg) == 0);
  }
  SUBCASE("4 segments holding 3,1,0,2 sum to 6") {
    Segmentation<Cell> seg;
    const std::int64_t vals[] = {3, 1, 0, 2};
    for (auto v : vals) {
      std::thread([&] { seg.segment_for_write().v.store(v); }).join();
    }
    CHECK(seg.size() == 4);
    CHECK(sum(seg) == 6);
  }
}

TEST_CASE("hash policy routes by hash modulo segment count") {
  Segmentation<Cell> seg(SegmentPolicy::Hash, 4);
  CHECK(seg.size() == 4);
  CHECK(seg.segment_for_hash(7) == 3);
  CHECK(seg.segment_for_hash(8) == 0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(seg.writer_of(i) == 0);
  Segmentation<Cell> dflt(SegmentPolicy::Hash);
  CHECK(dflt.size() == default_hash_segments());
}

TEST_CASE("growth under 16 registering threads keeps earlier segments valid") {
  Segmentation<Cell> seg;
  std::atomic<bool> stop{false};
  std::atomic<bool> bad{false};
  std::thread reader([&] {
    std::size_t last = 0;
    while (!stop.load()) {
      const std::size_t n = seg.size();
      if (n < last) bad = true;  // the array only grows
      last = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (seg.segment(i) == nullptr || seg.segment(i)->v.load() < 0) bad = true;
      }
      std::this_thread::yield();
    }
  });
  std::vector<Cell*> first(16, nullptr);
  std::vector<std::thread> ws;
  for (int t = 0; t < 16; ++t) {
    ws.emplace_back([&, t] {
      Cell& c = seg.segment_for_write();
      first[static_cast<std::size_t>(t)] = &c;
      for (int i = 0; i < 1000; ++i) {
        c.v.store(c.v.load(std::memory_order_relaxed) + 1, std::memory_order_release);
        if (&seg.segment_for_write() != &c) bad = true;
      }
    });
  }
  for (auto& w : ws) w.join();
  stop = true;
  reader.join();
  CHECK_FALSE(bad.load());
  CHECK(seg.size() == 16);
  CHECK(sum(seg) == 16000);
  std::set<Cell*> distinct(first.begin(), first.end());
  CHECK(distinct.size() == 16);
}

TEST_CASE("concurrent unit increments: reads stay within the window") {
  Segmentation<Cell> seg;
  constexpr int kWriters = 4, kIncs = 20000;
  std::atomic<std::int64_t> done{0};  // increments completed, counted after each
  std::atomic<bool> bad{false};
  std::atomic<int> finished{0};
  std::vector<std::thread> ws;
  for (int t = 0; t < kWriters; ++t) {
    ws.emplace_back([&] {
      Cell& c = seg.segment_for_write();
      for (int i = 0; i < kIncs; ++i) {
        c.v.store(c.v.load(std::memory_order_relaxed) + 1, std::memory_order_release);
        done.fetch_add(1);
      }
      finished.fetch_add(1);
    });
  }
  std::thread reader([&] {
    std::int64_t prev = 0;
    while (finished.load() < kWriters) {
      const std::int64_t lo = done.load();
      const std::int64_t v = sum(seg);
      // done is bumped after the store, so it may lag by one per writer.
      const std::int64_t hi = done.load() + kWriters;
      if (v < lo || v > hi || v < prev) bad = true;
      prev = v;
    }
  });
  for (auto& w : ws) w.join();
  reader.join();
  CHECK_FALSE(bad.load());
  CHECK(sum(seg) == kWriters * kIncs);
}

TEST_CASE("extended policy: an item keeps its segment") {
  ExtendedSegmentedHashMap<std::int64_t, std::int64_t> m;
  CHECK_FALSE(m.route(5).has_value());  // never inserted: absent, no error
  m.put(5, 50);
  const auto home = m.route(5);
  REQUIRE(home.has_value());
  std::optional<std::int64_t> seen;
  std::optional<std::size_t> route_there;
  std::thread([&] {
    seen = m.get(5);
    route_there = m.route(5);
    m.put(6, 60);  // lands in this thread's own segment
  }).join();
  CHECK(seen == 50);
  CHECK(route_there == home);
  CHECK(m.route(6) != home);
  CHECK(m.segments() == 2);
  // Removing and re-inserting from the original writer keeps the route.
  CHECK(m.remove(5));
  CHECK_FALSE(m.get(5).has_value());
  m.put(5, 51);
  CHECK(m.route(5) == home);
  CHECK(m.size() == 2);
}

TEST_CASE("extended routing is stable across threads under concurrency") {
  ExtendedSegmentedHashMap<std::int64_t, std::int64_t> m;
  constexpr int kWriters = 4;
  std::vector<std::thread> ws;
  for (int t = 0; t < kWriters; ++t) {
    ws.emplace_back([&, t] {
      for (std::int64_t k = t; k < 4000; k += kWriters) m.put(k, k);
      for (std::int64_t k = t; k < 4000; k += 2 * kWriters) m.remove(k);
    });
  }
  std::atomic<bool> bad{false};
  std::thread reader([&] {
    std::vector<std::optional<std::size_t>> first(4000);
    for (int round = 0; round < 20; ++round) {
      for (std::int64_t k = 0; k < 4000; ++k) {
        auto r = m.route(k);
        auto& f = first[static_cast<std::size_t>(k)];
        if (f && r != f) bad = true;
        if (r) f = r;
      }
    }
  });
  for (auto& w : ws) w.join();
  reader.join();
  CHECK_FALSE(bad.load());
  CHECK(m.size() == 2000);
  for (std::int64_t k = 0; k < 4000; ++k) {
    const bool removed = (k % (2 * kWriters)) < kWriters;
    CHECK(m.contains(k) == !removed);
  }
  reclaim::collect();
}
