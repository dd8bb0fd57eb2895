#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "adjusted/seqspec.hpp"
#include "stress.hpp"

using namespace adjusted;

namespace {

template <class F>
void run_threads(int n, F f) {
  std::vector<std::thread> ts;
  for (int t = 0; t < n; ++t) ts.emplace_back(f, t);
  for (auto& th : ts) th.join();
}

}  // namespace

TEST_CASE("counter") {
  SUBCASE("single thread inc(5) from 0 reads 5") {
    IncrementOnlyCounter c;
    c.inc(5);
    CHECK(c.read() == 5);
  }
  SUBCASE("4 threads x 1000 unit incs read 4000") {
    IncrementOnlyCounter c;
    run_threads(4, [&](int) {
      for (int i = 0; i < 1000; ++i) c.inc();
    });
    CHECK(c.read() == 4000);
    CHECK(c.segments() == 4);
  }
  SUBCASE("reads during increments stay in the window and never decrease") {
    IncrementOnlyCounter c;
    std::atomic<std::int64_t> done{0};
    std::atomic<int> finished{0};
    std::atomic<bool> bad{false};
    std::thread reader([&] {
      std::int64_t prev = 0;
      while (finished.load() < 3) {
        const auto lo = done.load();
        const auto v = c.read();
        const auto hi = done.load() + 3;
        if (v < lo || v > hi || v < prev) bad = true;
        prev = v;
      }
    });
    run_threads(3, [&](int) {
      for (int i = 0; i < 20000; ++i) {
        c.inc();
        done.fetch_add(1);
      }
      finished.fetch_add(1);
    });
    reader.join();
    CHECK_FALSE(bad.load());
    CHECK(c.read() == 60000);
  }
  SUBCASE("cas counter: 8 threads x 100000 incs") {
    CasCounter c;
    run_threads(8, [&](int) {
      for (int i = 0; i < 100000; ++i) c.inc();
    });
    CHECK(c.read() == 800000);
  }
}

TEST_CASE("write-once reference") {
  SUBCASE("get before set is absent; first set wins") {
    WriteOnceReference<int> r;
    CHECK(r.get() == nullptr);
    auto h = r.handle();
    CHECK(h.get() == nullptr);
    CHECK(r.set(5));
    CHECK_FALSE(r.set(7));
    REQUIRE(r.get() != nullptr);
    CHECK(*r.get() == 5);
    REQUIRE(h.get() != nullptr);
    CHECK(*h.get() == 5);
  }
  SUBCASE("racing sets: exactly one winner, every later get agrees") {
    for (int round = 0; round < 10000; ++round) {
      WriteOnceReference<int> r;
      int wins[2] = {0, 0};
      std::thread a([&] { wins[0] = r.set(1); });
      std::thread b([&] { wins[1] = r.set(2); });
      a.join();
      b.join();
      REQUIRE(wins[0] + wins[1] == 1);
      REQUIRE(*r.get() == (wins[0] ? 1 : 2));
    }
  }
  SUBCASE("monotone reads through cached handles") {
    WriteOnceReference<int> r;
    std::atomic<bool> bad{false};
    std::atomic<bool> go{false};
    std::vector<std::thread> readers;
    for (int t = 0; t < 3; ++t) {
      readers.emplace_back([&] {
        auto h = r.handle();
        const int* seen = nullptr;
        while (!go.load()) std::this_thread::yield();
        for (int i = 0; i < 20000; ++i) {
          const int* p = h.get();
          if (seen != nullptr && p != seen) bad = true;
          if (p != nullptr) seen = p;
        }
      });
    }
    go = true;
    r.set(9);
    for (auto& th : readers) th.join();
    CHECK_FALSE(bad.load());
  }
  SUBCASE("sc reference sets and gets in order") {
    ScReference<int> r(0);
    r.set(3);
    CHECK(r.get() == 3);
    r.set(4);
    CHECK(r.get() == 4);
  }
}

TEST_CASE("mpsc queue") {
  SUBCASE("fifo and empty poll") {
    MpscQueue<int> q;
    CHECK_FALSE(q.poll().has_value());
    CHECK(q.empty());
    q.offer(1);
    q.offer(2);
    CHECK(q.contains(2));
    CHECK(q.poll() == 1);
    CHECK_FALSE(q.contains(1));
    CHECK(q.poll() == 2);
    CHECK_FALSE(q.poll().has_value());
  }
  SUBCASE("4 producers x 10000 offers, one consumer drains") {
    MpscQueue<std::int64_t> q;
    constexpr int kProducers = 4, kEach = 10000;
    std::vector<std::int64_t> got;
    std::atomic<int> finished{0};
    std::thread consumer([&] {
      while (true) {
        if (auto v = q.poll()) {
          got.push_back(*v);
        } else if (finished.load() == kProducers) {
          while (auto w = q.poll()) got.push_back(*w);
          break;
        }
      }
    });
    run_threads(kProducers, [&](int t) {
      for (int i = 0; i < kEach; ++i) q.offer(std::int64_t{t} << 32 | i);
      finished.fetch_add(1);
    });
    consumer.join();
    CHECK(got.size() == kProducers * kEach);
    std::vector<std::int64_t> next(kProducers, 0);
    bool ordered = true;
    for (auto v : got) {
      const auto t = static_cast<std::size_t>(v >> 32);
      if ((v & 0xffffffff) != next[t]) ordered = false;
      ++next[t];
    }
    CHECK(ordered);
    reclaim::collect();
  }
  SUBCASE("mpmc queue drains to multiset equality under 4x4") {
    MpmcQueue<std::int64_t> q;
    std::atomic<int> producers_done{0};
    std::vector<std::vector<std::int64_t>> got(4);
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t) {
      ts.emplace_back([&, t] {
        for (int i = 0; i < 5000; ++i) q.offer(std::int64_t{t} * 100000 + i);
        producers_done.fetch_add(1);
      });
      ts.emplace_back([&, t] {
        while (true) {
          if (auto v = q.poll()) {
            got[static_cast<std::size_t>(t)].push_back(*v);
          } else if (producers_done.load() == 4) {
            if (auto w = q.poll()) {
              got[static_cast<std::size_t>(t)].push_back(*w);
              continue;
            }
            break;
          }
        }
      });
    }
    for (auto& th : ts) th.join();
    std::multiset<std::int64_t> all;
    for (auto& g : got) all.insert(g.begin(), g.end());
    std::multiset<std::int64_t> want;
    for (int t = 0; t < 4; ++t)
      for (int i = 0; i < 5000; ++i) want.insert(std::int64_t{t} * 100000 + i);
    CHECK(all == want);
    reclaim::collect();
  }
}

TEST_CASE_TEMPLATE("sequential map semantics", M, SwmrHashMap<int, int>, SwmrSkipListMap<int, int>,
                   ExtendedSegmentedHashMap<int, int>, ExtendedSegmentedSkipListMap<int, int>,
                   StripedHashMap<int, int>, LockedOrderedMap<int, int>) {
  M m;
  m.put(1, 10);
  CHECK(m.get(1) == 10);
  m.put(1, 11);
  CHECK(m.get(1) == 11);
  CHECK(m.contains(1));
  CHECK(m.remove(1));
  CHECK_FALSE(m.get(1).has_value());
  CHECK_FALSE(m.remove(1));
  CHECK_FALSE(m.contains(2));
}

TEST_CASE("swmr hash map: present keys never vanish across resizes") {
  SwmrHashMap<std::int64_t, std::int64_t> m;
  m.put(-1, 7);
  std::atomic<bool> stop{false}, bad{false};
  std::vector<std::thread> readers;
  for (int t = 0; t < 3; ++t) {
    readers.emplace_back([&] {
      while (!stop.load()) {
        if (m.get(-1) != 7) bad = true;
      }
    });
  }
  for (std::int64_t k = 0; k < 20000; ++k) m.put(k, k);
  for (std::int64_t k = 0; k < 20000; k += 2) m.remove(k);
  stop = true;
  for (auto& th : readers) th.join();
  CHECK_FALSE(bad.load());
  CHECK(m.size() == 10001);
  CHECK(m.bins() >= 16384);
  for (std::int64_t k = 0; k < 20000; ++k) REQUIRE(m.contains(k) == (k % 2 == 1));
  reclaim::collect();
}

TEST_CASE("swmr skip list: concurrent readers see a sorted duplicate-free bottom level") {
  SwmrSkipListMap<std::int64_t, std::int64_t> m(42);
  std::atomic<bool> stop{false}, bad{false};
  std::vector<std::thread> readers;
  for (int t = 0; t < 3; ++t) {
    readers.emplace_back([&] {
      while (!stop.load()) {
        const auto ks = m.keys();
        if (std::adjacent_find(ks.begin(), ks.end(), std::greater_equal<>()) != ks.end()) bad = true;
      }
    });
  }
  std::vector<std::int64_t> order(1000);
  for (std::int64_t i = 0; i < 1000; ++i) order[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
  for (auto k : order) m.put(k, k);
  stop = true;
  for (auto& th : readers) th.join();
  CHECK_FALSE(bad.load());
  CHECK(m.well_formed());
  CHECK(m.size() == 1000);
  const auto ks = m.keys();
  CHECK(ks.front() == 1);
  CHECK(ks.back() == 1000);
}

TEST_CASE("segmented maps with disjoint-key writers") {
  ExtendedSegmentedHashMap<std::int64_t, std::int64_t> h;
  ExtendedSegmentedSkipListMap<std::int64_t, std::int64_t> s;
  run_threads(4, [&](int t) {
    for (std::int64_t k = t; k < 8000; k += 4) {
      h.put(k, -k);
      s.put(k, -k);
    }
  });
  CHECK(h.size() == 8000);
  CHECK(s.size() == 8000);
  CHECK(h.segments() == 4);
  for (std::int64_t k = 0; k < 8000; ++k) {
    REQUIRE(h.get(k) == -k);
    REQUIRE(s.get(k) == -k);
  }
  reclaim::collect();
}

TEST_CASE("recorded schedules of the adjusted objects are linearizable") {
  for (const auto& target : stress::adjusted_targets()) {
    CAPTURE(target.name);
    const auto spec = catalog(target.run(0).spec);
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      const auto trial = target.run(seed);
      REQUIRE(!lin::well_formed(trial.history));
      const auto r = lin::check(trial.history, spec);
      INFO(lin::to_jsonl(trial.history));
      REQUIRE(r.linearizable);
      REQUIRE(lin::verify_witness(trial.history, spec, spec.init_state, *r.witness));
    }
  }
}

TEST_CASE("recorded schedules of the baselines are linearizable") {
  const auto q1 = catalog("Q1"), m1 = catalog("M2");
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    REQUIRE(lin::check(stress::queue<MpmcQueue<std::int64_t>>(seed, "queue.baseline").history, q1).linearizable);
    REQUIRE(lin::check(stress::swmr_map<StripedHashMap<std::int64_t, std::int64_t>>(seed, "hashmap.baseline").history, m1)
                .linearizable);
  }
}

TEST_CASE("the racy counter is caught") {
  const auto c2 = catalog("C2");
  int caught = 0;
  for (std::uint64_t seed = 1; seed <= 1000 && caught == 0; ++seed) {
    if (!lin::check(stress::broken_counter(seed).history, c2).linearizable) ++caught;
  }
  CHECK(caught > 0);
}
