#include "adjusted/bench/micro.hpp"

#include <algorithm>
#include <memory>
#include <random>
#include <sstream>
#include <unordered_set>

#include "adjusted/bench/harness.hpp"
#include "adjusted/objects/counter.hpp"
#include "adjusted/objects/hash_map.hpp"
#include "adjusted/objects/queue.hpp"
#include "adjusted/objects/reference.hpp"
#include "adjusted/objects/segmented_map.hpp"
#include "adjusted/objects/skip_list_map.hpp"

namespace adjusted::bench {

// ---------------------------------------------------------------------------
// Harness

void run_workers(int threads, const RunTiming& timing, std::size_t kinds,
                 const std::function<void(int)>& setup,
                 const std::function<void(int, std::size_t, WorkerStats&, bool)>& batch,
                 std::vector<WorkerStats>& out, const std::function<void(int)>& done) {
  out.assign(static_cast<std::size_t>(threads), WorkerStats{});
  for (auto& s : out) s.mix.assign(kinds, 0);
  std::atomic<int> phase{static_cast<int>(Phase::Setup)};
  std::atomic<int> ready{0};
  Clock::time_point warmup_end{};

  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      WorkerStats& st = out[static_cast<std::size_t>(t)];
      struct OnExit {
        const std::function<void(int)>& f;
        int t;
        ~OnExit() {
          if (f) f(t);
        }
      } on_exit{done, t};
      setup(t);
      ready.fetch_add(1, std::memory_order_acq_rel);
      while (phase.load(std::memory_order_acquire) == static_cast<int>(Phase::Setup))
        std::this_thread::yield();
      if (timing.max_ops) {
        st.started = true;
        st.first = Clock::now();
        std::uint64_t left = *timing.max_ops;
        while (left > 0) {
          const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(left, timing.batch));
          batch(t, n, st, true);
          st.ops += n;
          left -= n;
        }
        st.last = Clock::now();
        return;
      }
      while (true) {
        const auto p = static_cast<Phase>(phase.load(std::memory_order_acquire));
        if (p == Phase::Stop) break;
        const bool measured = p == Phase::Measure;
        if (measured && !st.started) {
          st.started = true;
          st.first = Clock::now();
        }
        batch(t, timing.batch, st, measured);
        if (measured) {
          st.ops += timing.batch;
          st.last = Clock::now();
        }
      }
    });
  }
  while (ready.load(std::memory_order_acquire) < threads) std::this_thread::yield();
  if (timing.max_ops) {
    phase.store(static_cast<int>(Phase::Measure), std::memory_order_release);
  } else {
    phase.store(static_cast<int>(Phase::Warmup), std::memory_order_release);
    std::this_thread::sleep_for(std::chrono::duration<double>(timing.warmup));
    warmup_end = Clock::now();
    phase.store(static_cast<int>(Phase::Measure), std::memory_order_release);
    std::this_thread::sleep_for(std::chrono::duration<double>(timing.duration));
    phase.store(static_cast<int>(Phase::Stop), std::memory_order_release);
  }
  for (auto& th : pool) th.join();
  for (const auto& st : out) {
    if (st.started && st.first < warmup_end) throw std::logic_error("measured window overlaps warmup");
  }
}

void collect_run(BenchReport& r, int run, const std::vector<WorkerStats>& stats,
                 const std::vector<std::string>& kind_names) {
  for (std::size_t t = 0; t < stats.size(); ++t) {
    const auto& st = stats[t];
    ThreadSample s;
    s.run = run;
    s.thread = static_cast<int>(t);
    s.ops = st.ops;
    if (st.started) {
      s.seconds = std::chrono::duration<double>(st.last - st.first).count() - st.excluded;
    }
    s.ops_per_sec = s.seconds > 0 ? static_cast<double>(s.ops) / s.seconds : 0;
    r.samples.push_back(s);
    for (std::size_t k = 0; k < kind_names.size(); ++k) r.mix[kind_names[k]] += st.mix[k];
  }
}

void finalize(BenchReport& r) {
  r.per_thread.assign(static_cast<std::size_t>(r.threads), 0);
  std::vector<int> runs(static_cast<std::size_t>(r.threads), 0);
  r.total_ops = 0;
  for (const auto& s : r.samples) {
    r.per_thread[static_cast<std::size_t>(s.thread)] += s.ops_per_sec;
    ++runs[static_cast<std::size_t>(s.thread)];
    r.total_ops += s.ops;
  }
  r.aggregate = 0;
  for (std::size_t t = 0; t < r.per_thread.size(); ++t) {
    if (runs[t] > 0) r.per_thread[t] /= runs[t];
    r.aggregate += r.per_thread[t];
  }
}

std::string report_csv(const BenchReport& r) {
  std::ostringstream out;
  out << "run,thread,ops,seconds,ops_per_sec\n";
  for (const auto& s : r.samples) {
    out << s.run << ',' << s.thread << ',' << s.ops << ',' << s.seconds << ',' << s.ops_per_sec << '\n';
  }
  return out.str();
}

nlohmann::json report_json(const BenchReport& r) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["name"] = r.name;
  j["threads"] = r.threads;
  j["per_thread"] = r.per_thread;
  j["aggregate"] = r.aggregate;
  j["total_ops"] = r.total_ops;
  j["mix"] = r.mix;
  auto& samples = j["samples"] = nlohmann::json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"run", s.run},
                       {"thread", s.thread},
                       {"ops", s.ops},
                       {"seconds", s.seconds},
                       {"ops_per_sec", s.ops_per_sec}});
  }
  if (r.baseline) j["baseline"] = *r.baseline;
  if (r.ratio) j["ratio"] = *r.ratio;
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

void attach_baseline(BenchReport& r, const BenchReport& base) {
  r.baseline = base.name;
  const double mine = r.threads > 0 ? r.aggregate / r.threads : 0;
  const double theirs = base.threads > 0 ? base.aggregate / base.threads : 0;
  if (theirs > 0) r.ratio = mine / theirs;
}

// ---------------------------------------------------------------------------
// Workloads

namespace {

using Rng = std::mt19937_64;

struct Workload {
  virtual ~Workload() = default;
  virtual std::vector<std::string> kinds() const = 0;
  virtual void setup(int t, Rng& rng) = 0;
  // Returns the kind index of the executed operation.
  virtual std::size_t op(int t, Rng& rng, bool update) = 0;
  virtual void done(int) {}
};

template <class C>
struct CounterWork : Workload {
  C c;
  std::vector<std::string> kinds() const override { return {"inc", "read"}; }
  void setup(int, Rng&) override {}
  std::size_t op(int, Rng&, bool update) override {
    if (update) {
      c.inc();
      return 0;
    }
    keep(static_cast<std::uint64_t>(c.read()));
    return 1;
  }
};

struct WriteOnceWork : Workload {
  WriteOnceReference<std::int64_t> ref;
  std::vector<std::optional<WriteOnceReference<std::int64_t>::Handle>> handles;
  explicit WriteOnceWork(int threads) : handles(static_cast<std::size_t>(threads)) { ref.set(42); }
  std::vector<std::string> kinds() const override { return {"set", "get"}; }
  void setup(int t, Rng&) override { handles[static_cast<std::size_t>(t)].emplace(ref.handle()); }
  std::size_t op(int t, Rng& rng, bool update) override {
    if (update) {
      ref.set(static_cast<std::int64_t>(rng() & 0xffff));
      return 0;
    }
    keep(static_cast<std::uint64_t>(*handles[static_cast<std::size_t>(t)]->get()));
    return 1;
  }
};

struct ScReferenceWork : Workload {
  ScReference<std::int64_t> ref{42};
  std::vector<std::string> kinds() const override { return {"set", "get"}; }
  void setup(int, Rng&) override {}
  std::size_t op(int, Rng& rng, bool update) override {
    if (update) {
      ref.set(static_cast<std::int64_t>(rng() & 0xffff));
      return 0;
    }
    keep(static_cast<std::uint64_t>(ref.get()));
    return 1;
  }
};

// Thread 0 consumes; every other thread produces. A producer waits while
// its own backlog exceeds kBacklog (and the consumer is still running) so the
// queue stays short.
template <class Q>
struct QueueWork : Workload {
  static constexpr std::uint64_t kBacklog = 4096;
  struct alignas(ord::kCacheLine) Counter {
    std::atomic<std::uint64_t> v{0};
  };
  Q q;
  int threads;
  std::vector<Counter> offered, polled;
  std::vector<std::uint64_t> parity;
  std::atomic<bool> consumer_done{false};
  explicit QueueWork(int n)
      : threads(n), offered(static_cast<std::size_t>(n)), polled(static_cast<std::size_t>(n)),
        parity(static_cast<std::size_t>(n), 0) {}
  std::vector<std::string> kinds() const override { return {"offer", "poll", "contains"}; }
  void setup(int, Rng&) override {}

  void offer(int t) {
    auto& mine = offered[static_cast<std::size_t>(t)].v;
    const std::uint64_t seq = mine.load(std::memory_order_relaxed);
    if (threads > 1) {
      while (seq - polled[static_cast<std::size_t>(t)].v.load(std::memory_order_acquire) >= kBacklog &&
             !consumer_done.load(std::memory_order_relaxed))
        std::this_thread::yield();
    }
    q.offer(static_cast<std::int64_t>((static_cast<std::uint64_t>(t) << 40) | seq));
    mine.store(seq + 1, std::memory_order_relaxed);
  }

  void done(int t) override {
    if (t == 0) consumer_done.store(true, std::memory_order_relaxed);
  }

  void poll() {
    if (auto v = q.poll()) {
      auto& c = polled[static_cast<std::size_t>(static_cast<std::uint64_t>(*v) >> 40)].v;
      c.store(c.load(std::memory_order_relaxed) + 1, std::memory_order_release);
    }
  }

  std::size_t op(int t, Rng& rng, bool update) override {
    if (!update) {
      keep(q.contains(static_cast<std::int64_t>(rng() & 0xffff)) ? 1 : 0);
      return 2;
    }
    if (t == 0) {
      if (threads == 1 && (parity[0]++ & 1) == 0) {
        offer(0);
        return 0;
      }
      poll();
      return 1;
    }
    offer(t);
    return 0;
  }
};

// Updates go to keys owned by the calling thread (key % threads == t), split
// evenly between put and remove; reads use any key.
template <class M>
struct MapWork : Workload {
  M m;
  int threads;
  std::size_t initial, range;
  bool route;
  MapWork(int n, std::size_t init, std::size_t r, bool rt) : threads(n), initial(init), range(r), route(rt) {}
  std::vector<std::string> kinds() const override { return {"put", "remove", "get"}; }

  std::int64_t owned_key(int t, Rng& rng) const {
    const std::uint64_t slots = (range - static_cast<std::size_t>(t) + threads - 1) / static_cast<std::size_t>(threads);
    return static_cast<std::int64_t>((rng() % slots) * static_cast<std::uint64_t>(threads) + static_cast<std::uint64_t>(t));
  }

  void setup(int t, Rng& rng) override {
    const std::size_t share = initial / static_cast<std::size_t>(threads) +
                              (static_cast<std::size_t>(t) < initial % static_cast<std::size_t>(threads) ? 1 : 0);
    std::unordered_set<std::int64_t> seen;
    while (seen.size() < share) {
      const auto k = owned_key(t, rng);
      if (seen.insert(k).second) m.put(k, k);
    }
  }

  std::size_t op(int t, Rng& rng, bool update) override {
    if (update) {
      const auto k = route ? owned_key(t, rng) : static_cast<std::int64_t>(rng() % range);
      if (rng() & 1) {
        m.put(k, k);
        return 0;
      }
      m.remove(k);
      return 1;
    }
    keep(static_cast<std::uint64_t>(m.get(static_cast<std::int64_t>(rng() % range)).value_or(0)));
    return 2;
  }
};

std::unique_ptr<Workload> make_workload(const MicroConfig& cfg) {
  const auto& o = cfg.object;
  const int n = cfg.threads;
  if (o == "counter.adjusted") return std::make_unique<CounterWork<IncrementOnlyCounter>>();
  if (o == "counter.baseline") return std::make_unique<CounterWork<CasCounter>>();
  if (o == "reference.adjusted") return std::make_unique<WriteOnceWork>(n);
  if (o == "reference.baseline") return std::make_unique<ScReferenceWork>();
  if (o == "queue.adjusted") return std::make_unique<QueueWork<MpscQueue<std::int64_t>>>(n);
  if (o == "queue.baseline") return std::make_unique<QueueWork<MpmcQueue<std::int64_t>>>(n);
  if (o == "hashmap.adjusted")
    return std::make_unique<MapWork<ExtendedSegmentedHashMap<std::int64_t, std::int64_t>>>(n, cfg.initial_size, cfg.key_range, cfg.route_keys);
  if (o == "hashmap.baseline")
    return std::make_unique<MapWork<StripedHashMap<std::int64_t, std::int64_t>>>(n, cfg.initial_size, cfg.key_range, cfg.route_keys);
  if (o == "skiplist.adjusted")
    return std::make_unique<MapWork<ExtendedSegmentedSkipListMap<std::int64_t, std::int64_t>>>(n, cfg.initial_size, cfg.key_range, cfg.route_keys);
  if (o == "skiplist.baseline")
    return std::make_unique<MapWork<LockedOrderedMap<std::int64_t, std::int64_t>>>(n, cfg.initial_size, cfg.key_range, cfg.route_keys);
  throw UsageError("unknown object '" + o + "'");
}

}  // namespace

std::vector<std::string> micro_objects() {
  return {"counter.adjusted",  "counter.baseline",  "reference.adjusted", "reference.baseline",
          "queue.adjusted",    "queue.baseline",    "hashmap.adjusted",   "hashmap.baseline",
          "skiplist.adjusted", "skiplist.baseline"};
}

ObjectContract micro_contract(const std::string& object) {
  if (object == "counter.adjusted") return {"C3", AccessClass::CWMR};
  if (object == "counter.baseline") return {"C1", AccessClass::ALL};
  if (object == "reference.adjusted") return {"R2", AccessClass::ALL};
  if (object == "reference.baseline") return {"R1", AccessClass::ALL};
  if (object == "queue.adjusted") return {"Q1", AccessClass::MWSR};
  if (object == "queue.baseline") return {"Q1", AccessClass::ALL};
  if (object == "hashmap.adjusted" || object == "skiplist.adjusted") return {"M2", AccessClass::CWMR};
  if (object == "hashmap.baseline" || object == "skiplist.baseline") return {"M1", AccessClass::ALL};
  throw UsageError("unknown object '" + object + "'");
}

std::optional<std::string> baseline_of(const std::string& object) {
  const auto dot = object.find('.');
  if (dot == std::string::npos || object.substr(dot + 1) != "adjusted") return std::nullopt;
  return object.substr(0, dot) + ".baseline";
}

MicroConfig full_scale(MicroConfig cfg) {
  cfg.duration = 60;
  cfg.warmup = 30;
  cfg.runs = 30;
  return cfg;
}

void validate(const MicroConfig& cfg) {
  if (cfg.threads < 1) throw UsageError("threads must be positive");
  if (cfg.update_ratio < 0 || cfg.update_ratio > 100) throw UsageError("update ratio must be in [0,100]");
  if (cfg.key_range == 0 || cfg.batch == 0 || cfg.runs < 1) throw UsageError("counts must be positive");
  if (cfg.initial_size > cfg.key_range) throw UsageError("initial size exceeds key range");
  if (cfg.key_range < static_cast<std::size_t>(cfg.threads))
    throw UsageError("key range must be at least the thread count");
  if (!cfg.max_ops && (cfg.duration <= 0 || cfg.warmup < 0)) throw UsageError("durations must be positive");

  // The generated workload must respect the object's permission map.
  const auto contract = micro_contract(cfg.object);
  const auto spec = catalog(contract.spec);
  PermissionMap pmap;
  std::vector<std::pair<int, OpInstance>> writers;
  switch (contract.access_class) {
    case AccessClass::MWSR:
      pmap = PermissionMap::mwsr(spec, cfg.threads, 0);  // thread 0 consumes
      break;
    case AccessClass::CWMR:
      pmap = PermissionMap::cwmr(spec, cfg.threads);
      for (int t = 0; t < std::min(cfg.threads, 2); ++t) {
        // representative concurrent updates: owned keys differ per thread
        const std::int64_t key = cfg.route_keys ? t + 1 : 1;
        writers.push_back({t, contract.spec == "C3" ? OpInstance{"inc", {}, t}
                                                    : OpInstance{"put", {key, t + 1}, t}});
      }
      break;
    default:
      pmap = PermissionMap::all(spec, cfg.threads);
  }
  if (auto err = adjusted::validate(pmap, spec)) throw UsageError("permission map: " + *err);
  if (!writers.empty() && !complies(writers, pmap, spec))
    throw UsageError("workload updates do not commute under " + to_string(contract.access_class));
}

BenchReport micro_run(const MicroConfig& cfg) {
  validate(cfg);
  BenchReport report;
  report.name = cfg.object;
  report.threads = cfg.threads;
  RunTiming timing{cfg.warmup, cfg.duration, cfg.batch, cfg.max_ops};
  for (int run = 0; run < cfg.runs; ++run) {
    auto work = make_workload(cfg);
    const auto kinds = work->kinds();
    std::vector<Rng> rngs;
    for (int t = 0; t < cfg.threads; ++t)
      rngs.emplace_back(cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(run) * 1000003ULL +
                        static_cast<std::uint64_t>(t));
    std::vector<WorkerStats> stats;
    run_workers(
        cfg.threads, timing, kinds.size(),
        [&](int t) { work->setup(t, rngs[static_cast<std::size_t>(t)]); },
        [&](int t, std::size_t n, WorkerStats& st, bool measured) {
          auto& rng = rngs[static_cast<std::size_t>(t)];
          for (std::size_t i = 0; i < n; ++i) {
            const bool update = static_cast<int>(rng() % 100) < cfg.update_ratio;
            const std::size_t k = work->op(t, rng, update);
            if (measured) ++st.mix[k];
          }
        },
        stats, [&](int t) { work->done(t); });
    collect_run(report, run, stats, kinds);
    reclaim::collect();
  }
  finalize(report);
  report.extra["update_ratio"] = cfg.update_ratio;
  report.extra["access_class"] = to_string(micro_contract(cfg.object).access_class);
  return report;
}

}  // namespace adjusted::bench
