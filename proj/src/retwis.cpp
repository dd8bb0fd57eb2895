#include "adjusted/bench/retwis.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "adjusted/bench/harness.hpp"
#include "adjusted/bench/social_graph.hpp"
#include "adjusted/bench/zipf.hpp"
#include "adjusted/objects/hash_map.hpp"
#include "adjusted/objects/queue.hpp"
#include "adjusted/objects/segmented_map.hpp"
#include "adjusted/segmentation.hpp"

namespace adjusted::bench {

const std::array<std::string, kRetwisOps>& retwis_op_names() {
  static const std::array<std::string, kRetwisOps> names = {"add_user", "follow", "post",
                                                            "timeline", "group",  "profile"};
  return names;
}

std::vector<std::string> retwis_variants() { return {"baseline", "adjusted", "dap"}; }

std::array<int, kRetwisOps> parse_mix(const std::string& text) {
  std::array<int, kRetwisOps> mix{};
  std::istringstream in(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(in, item, ',')) {
    if (i == kRetwisOps) throw UsageError("mix needs exactly 6 percentages");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw UsageError("mix entry '" + item + "' is not an integer");
    }
    if (used != item.size() || v < 0) throw UsageError("mix entry '" + item + "' is not a non-negative integer");
    mix[i++] = v;
  }
  if (i != kRetwisOps) throw UsageError("mix needs exactly 6 percentages");
  int sum = 0;
  for (int v : mix) sum += v;
  if (sum != 100) throw UsageError("mix sums to " + std::to_string(sum) + ", not 100");
  return mix;
}

void validate(const RetwisConfig& cfg) {
  int sum = 0;
  for (int v : cfg.mix) {
    if (v < 0) throw UsageError("mix percentages must be non-negative");
    sum += v;
  }
  if (sum != 100) throw UsageError("mix sums to " + std::to_string(sum) + ", not 100");
  if (cfg.users < 2) throw UsageError("users must be at least 2");
  if (!(cfg.alpha > 0 && cfg.alpha <= 1)) throw UsageError("alpha must be in (0, 1]");
  if (cfg.threads < 1 || cfg.threads > 256) throw UsageError("threads must be in [1, 256]");
  if (cfg.runs < 1) throw UsageError("runs must be positive");
  if (cfg.batch < 1) throw UsageError("batch must be positive");
  if (cfg.timeline_cap < 1) throw UsageError("timeline cap must be positive");
  if (!cfg.max_ops && !(cfg.duration > 0)) throw UsageError("duration must be positive");
  if (cfg.warmup < 0) throw UsageError("warmup must be non-negative");
  const auto vs = retwis_variants();
  if (std::find(vs.begin(), vs.end(), cfg.variant) == vs.end()) {
    throw UsageError("unknown variant '" + cfg.variant + "' (baseline, adjusted, dap)");
  }
}

namespace {

using Id = std::int64_t;

struct Msg {
  Id author = 0;
  std::int64_t seq = 0;
  bool operator==(const Msg& o) const { return author == o.author && seq == o.seq; }
};

// Quiescent view used by the audit.
struct Snapshot {
  std::set<Id> users;
  std::map<Id, std::set<Id>> following;
  std::map<Id, std::set<Id>> followers;
  std::vector<Id> community;
  std::vector<Id> authors;  // authors of undelivered timeline entries
};

// Thread t acts for the users it owns; `t` is passed so that adjusted
// objects can route writes to the caller's segment.
class Store {
 public:
  virtual ~Store() = default;
  virtual void create(Id u) = 0;  // before workers start
  virtual void add_user(int t, Id u) = 0;
  virtual bool follows(int t, Id u, Id v) const = 0;
  virtual void follow(int t, Id u, Id v) = 0;
  virtual void unfollow(int t, Id u, Id v) = 0;
  virtual std::size_t post(int t, Id u, const Msg& m, std::size_t fanout) = 0;
  virtual void timeline(int t, Id u, std::size_t cap, std::vector<Msg>& out) = 0;
  virtual bool toggle_group(int t, Id u) = 0;  // true if u joined
  virtual void update_profile(int t, Id u, std::int64_t value) = 0;
  virtual void snapshot(Snapshot& s) const = 0;
};

// Drains into out and keeps the newest cap entries.
template <class Q>
void drain_last(Q& q, std::size_t cap, std::vector<Msg>& out) {
  out.clear();
  std::size_t total = 0;
  while (auto m = q.poll()) {
    if (out.size() < cap) {
      out.push_back(*m);
    } else {
      out[total % cap] = *m;
    }
    ++total;
  }
  if (total > cap) std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(total % cap), out.end());
}

// ---------------------------------------------------------------------------
// Baseline: lock-based and lock-free objects usable by any thread.

class BaselineStore final : public Store {
  struct Record {
    mutable std::mutex mu;
    std::unordered_set<Id> followers;
    std::unordered_set<Id> following;
    MpmcQueue<Msg> timeline;
    std::atomic<std::int64_t> profile{0};
  };

 public:
  ~BaselineStore() override {
    for (auto* r : records_) delete r;
  }
  void create(Id u) override { insert(u); }
  void add_user(int, Id u) override { insert(u); }
  bool follows(int, Id u, Id v) const override {
    Record* r = at(u);
    std::lock_guard lk(r->mu);
    return r->following.count(v) > 0;
  }
  void follow(int, Id u, Id v) override {
    {
      Record* r = at(u);
      std::lock_guard lk(r->mu);
      r->following.insert(v);
    }
    Record* r = at(v);
    std::lock_guard lk(r->mu);
    r->followers.insert(u);
  }
  void unfollow(int, Id u, Id v) override {
    {
      Record* r = at(u);
      std::lock_guard lk(r->mu);
      r->following.erase(v);
    }
    Record* r = at(v);
    std::lock_guard lk(r->mu);
    r->followers.erase(u);
  }
  std::size_t post(int, Id u, const Msg& m, std::size_t fanout) override {
    std::vector<Id> first;
    {
      Record* r = at(u);
      std::lock_guard lk(r->mu);
      for (Id f : r->followers) {
        if (first.size() == fanout) break;
        first.push_back(f);
      }
    }
    for (Id f : first) at(f)->timeline.offer(m);
    return first.size();
  }
  void timeline(int, Id u, std::size_t cap, std::vector<Msg>& out) override {
    drain_last(at(u)->timeline, cap, out);
  }
  bool toggle_group(int, Id u) override {
    if (community_.remove(u)) return false;
    community_.put(u, 1);
    return true;
  }
  void update_profile(int, Id u, std::int64_t value) override {
    at(u)->profile.store(value, std::memory_order_seq_cst);
  }
  void snapshot(Snapshot& s) const override {
    directory_.for_each([&](Id u, Record* r) {
      s.users.insert(u);
      s.following[u].insert(r->following.begin(), r->following.end());
      s.followers[u].insert(r->followers.begin(), r->followers.end());
      r->timeline.for_each([&](const Msg& m) { s.authors.push_back(m.author); });
    });
    community_.for_each([&](Id u, std::int64_t) { s.community.push_back(u); });
  }

 private:
  void insert(Id u) {
    auto* r = new Record;
    {
      std::lock_guard lk(records_mu_);
      records_.push_back(r);
    }
    directory_.put(u, r);
  }
  Record* at(Id u) const { return *directory_.get(u); }

  StripedHashMap<Id, Record*> directory_;
  StripedHashMap<Id, std::int64_t> community_;
  std::mutex records_mu_;
  std::vector<Record*> records_;
};

// ---------------------------------------------------------------------------
// Adjusted: every write to a shared object comes from the thread owning the
// written entry, so CWMR maps, per-writer follower segments and MPSC
// timelines suffice.

class AdjustedStore final : public Store {
  using Set = SwmrHashMap<Id, std::int64_t>;
  struct Record {
    explicit Record(int threads) : followers(new std::atomic<Set*>[static_cast<std::size_t>(threads)]) {
      for (int t = 0; t < threads; ++t) followers[static_cast<std::size_t>(t)].store(nullptr, std::memory_order_relaxed);
    }
    Set following;  // written by the owner of the user
    // Slot t holds the followers owned by thread t; only thread t writes it.
    std::unique_ptr<std::atomic<Set*>[]> followers;
    MpscQueue<Msg> timeline;  // consumed by the owner of the user
    std::atomic<std::int64_t> profile{0};
  };

 public:
  explicit AdjustedStore(int threads) : threads_(threads) {}
  ~AdjustedStore() override {
    for (auto* r : records_) {
      for (int t = 0; t < threads_; ++t) delete r->followers[static_cast<std::size_t>(t)].load();
      delete r;
    }
  }
  void create(Id u) override { insert(u); }
  void add_user(int, Id u) override { insert(u); }
  bool follows(int, Id u, Id v) const override { return at(u)->following.contains(v); }
  void follow(int t, Id u, Id v) override {
    at(u)->following.put(v, 1);
    slot(at(v), t).put(u, 1);
  }
  void unfollow(int t, Id u, Id v) override {
    at(u)->following.remove(v);
    slot(at(v), t).remove(u);
  }
  std::size_t post(int, Id u, const Msg& m, std::size_t fanout) override {
    Record* r = at(u);
    std::size_t sent = 0;
    for (int s = 0; s < threads_ && sent < fanout; ++s) {
      Set* seg = r->followers[static_cast<std::size_t>(s)].load(std::memory_order_acquire);
      if (seg == nullptr) continue;
      seg->for_each_while([&](Id f, std::int64_t) {
        at(f)->timeline.offer(m);
        return ++sent < fanout;
      });
    }
    return sent;
  }
  void timeline(int, Id u, std::size_t cap, std::vector<Msg>& out) override {
    drain_last(at(u)->timeline, cap, out);
  }
  bool toggle_group(int, Id u) override {
    if (community_.remove(u)) return false;
    community_.put(u, 1);
    return true;
  }
  void update_profile(int, Id u, std::int64_t value) override {
    at(u)->profile.store(value, std::memory_order_release);
  }
  void snapshot(Snapshot& s) const override {
    directory_.for_each([&](Id u, Record* r) {
      s.users.insert(u);
      r->following.for_each([&](Id v, std::int64_t) { s.following[u].insert(v); });
      auto& fs = s.followers[u];
      for (int t = 0; t < threads_; ++t) {
        if (Set* seg = r->followers[static_cast<std::size_t>(t)].load()) {
          seg->for_each([&](Id f, std::int64_t) { fs.insert(f); });
        }
      }
      r->timeline.for_each([&](const Msg& m) { s.authors.push_back(m.author); });
    });
    community_.for_each([&](Id u, std::int64_t) { s.community.push_back(u); });
  }

 private:
  void insert(Id u) {
    auto* r = new Record(threads_);
    {
      std::lock_guard lk(records_mu_);
      records_.push_back(r);
    }
    directory_.put(u, r);
  }
  Record* at(Id u) const { return *directory_.get(u); }
  static Set& slot(Record* r, int t) {
    auto& a = r->followers[static_cast<std::size_t>(t)];
    Set* s = a.load(std::memory_order_relaxed);
    if (s == nullptr) {
      s = new Set;
      a.store(s, std::memory_order_release);
    }
    return *s;
  }

  int threads_;
  ExtendedSegmentedHashMap<Id, Record*> directory_;
  ExtendedSegmentedHashMap<Id, std::int64_t> community_;
  std::mutex records_mu_;
  std::vector<Record*> records_;
};

// ---------------------------------------------------------------------------
// Disjoint-access parallel: one private sequential store per thread.

class DapStore final : public Store {
  struct Record {
    std::unordered_set<Id> followers;
    std::unordered_set<Id> following;
    std::vector<Msg> timeline;
    std::int64_t profile = 0;
  };

 public:
  void create(Id u) override { users_[u]; }
  void add_user(int, Id u) override { users_[u]; }
  bool follows(int, Id u, Id v) const override { return users_.at(u).following.count(v) > 0; }
  void follow(int, Id u, Id v) override {
    users_.at(u).following.insert(v);
    users_.at(v).followers.insert(u);
  }
  void unfollow(int, Id u, Id v) override {
    users_.at(u).following.erase(v);
    users_.at(v).followers.erase(u);
  }
  std::size_t post(int, Id u, const Msg& m, std::size_t fanout) override {
    std::size_t sent = 0;
    for (Id f : users_.at(u).followers) {
      if (sent == fanout) break;
      users_.at(f).timeline.push_back(m);
      ++sent;
    }
    return sent;
  }
  void timeline(int, Id u, std::size_t cap, std::vector<Msg>& out) override {
    auto& q = users_.at(u).timeline;
    const std::size_t from = q.size() > cap ? q.size() - cap : 0;
    out.assign(q.begin() + static_cast<std::ptrdiff_t>(from), q.end());
    q.clear();
  }
  bool toggle_group(int, Id u) override {
    if (community_.erase(u) > 0) return false;
    community_.insert(u);
    return true;
  }
  void update_profile(int, Id u, std::int64_t value) override { users_.at(u).profile = value; }
  void snapshot(Snapshot& s) const override {
    for (const auto& [u, r] : users_) {
      s.users.insert(u);
      s.following[u].insert(r.following.begin(), r.following.end());
      s.followers[u].insert(r.followers.begin(), r.followers.end());
      for (const auto& m : r.timeline) s.authors.push_back(m.author);
    }
    s.community.insert(s.community.end(), community_.begin(), community_.end());
  }

 private:
  std::unordered_map<Id, Record> users_;
  std::unordered_set<Id> community_;
};

// ---------------------------------------------------------------------------
// Driver

Id initial_id(std::uint32_t i, int owner) { return static_cast<Id>((std::uint64_t{i} << 8) | static_cast<std::uint64_t>(owner)); }

Id fresh_id(std::uint64_t seq, int t) {
  return static_cast<Id>((((std::uint64_t{1} << 32) + seq) << 8) | static_cast<std::uint64_t>(t));
}

std::uint64_t mix_digest(std::uint64_t h, std::uint64_t v) { return hash64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

struct alignas(ord::kCacheLine) Actor {
  std::mt19937_64 rng;
  std::vector<Id> actors;   // owned initial users, most popular first
  std::vector<Id> targets;  // users that can be followed, most popular first
  std::optional<ZipfSampler> pick_actor;
  std::optional<ZipfSampler> pick_target;
  std::vector<std::pair<Id, Id>> edges;  // initial follows issued by this thread
  std::uint64_t fresh = 0;
  std::int64_t posts = 0;
  std::uint64_t digest = 0;
  std::size_t longest = 0;
  std::vector<Msg> buf;
};

struct Plan {
  SocialGraph graph;
  std::vector<int> owner;  // by user index
};

void audit(const std::vector<Store*>& stores, const std::vector<Actor>& actors, std::size_t cap,
           RetwisAudit& a) {
  auto note = [&](const std::string& msg) {
    if (a.problems.size() < 8) a.problems.push_back(msg);
  };
  for (const Store* store : stores) {
    Snapshot s;
    store->snapshot(s);
    a.users += s.users.size();
    for (const auto& [u, vs] : s.following) {
      a.edges += vs.size();
      for (Id v : vs) {
        auto it = s.followers.find(v);
        if (it == s.followers.end() || it->second.count(u) == 0) {
          a.symmetric = false;
          note(std::to_string(u) + " follows " + std::to_string(v) + " but is not its follower");
        }
      }
    }
    for (const auto& [v, us] : s.followers) {
      for (Id u : us) {
        auto it = s.following.find(u);
        if (it == s.following.end() || it->second.count(v) == 0) {
          a.symmetric = false;
          note(std::to_string(u) + " is a follower of " + std::to_string(v) + " without following it");
        }
      }
    }
    for (Id u : s.community) {
      if (s.users.count(u) == 0) {
        a.community_profiles = false;
        note("community member " + std::to_string(u) + " has no profile");
      }
    }
    for (Id author : s.authors) {
      if (s.users.count(author) == 0) {
        a.timeline_authors = false;
        note("timeline entry by unknown user " + std::to_string(author));
      }
    }
  }
  for (const auto& ac : actors) a.longest_timeline = std::max(a.longest_timeline, ac.longest);
  if (a.longest_timeline > cap) {
    a.timeline_cap = false;
    note("a timeline fetch returned " + std::to_string(a.longest_timeline) + " messages");
  }
}

}  // namespace

RetwisResult retwis_run(const RetwisConfig& cfg) {
  validate(cfg);
  const int T = cfg.threads;
  const bool dap = cfg.variant == "dap";
  Plan plan;
  plan.graph = build_social_graph(cfg.users, cfg.alpha, cfg.seed, cfg.avg_degree);
  plan.owner.resize(cfg.users);
  for (std::uint32_t i = 0; i < cfg.users; ++i) plan.owner[i] = jump_consistent_hash(i, T);
  auto id_of = [&](std::uint32_t i) { return initial_id(i, plan.owner[i]); };

  std::array<int, kRetwisOps + 1> cumulative{};
  for (std::size_t k = 0; k < kRetwisOps; ++k) cumulative[k + 1] = cumulative[k] + cfg.mix[k];

  RetwisResult result;
  BenchReport& report = result.report;
  report.name = "retwis." + cfg.variant;
  report.threads = T;
  const auto& names = retwis_op_names();
  const std::vector<std::string> kind_names(names.begin(), names.end());

  std::vector<std::unique_ptr<Store>> stores;
  std::vector<Actor> actors;
  for (int run = 0; run < cfg.runs; ++run) {
    stores.clear();
    if (dap) {
      for (int t = 0; t < T; ++t) stores.push_back(std::make_unique<DapStore>());
    } else if (cfg.variant == "adjusted") {
      stores.push_back(std::make_unique<AdjustedStore>(T));
    } else {
      stores.push_back(std::make_unique<BaselineStore>());
    }
    auto store_of = [&](int t) -> Store& { return *stores[dap ? static_cast<std::size_t>(t) : 0]; };

    actors = std::vector<Actor>(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      actors[static_cast<std::size_t>(t)].rng.seed(cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(run) * 1000003 +
                                                   static_cast<std::uint64_t>(t));
    }
    for (std::uint32_t i = 0; i < cfg.users; ++i) store_of(plan.owner[i]).create(id_of(i));
    for (std::uint32_t i : plan.graph.popular) {
      const int o = plan.owner[i];
      actors[static_cast<std::size_t>(o)].actors.push_back(id_of(i));
      if (dap) actors[static_cast<std::size_t>(o)].targets.push_back(id_of(i));
    }
    if (!dap) {
      std::vector<Id> all;
      for (std::uint32_t i : plan.graph.popular) all.push_back(id_of(i));
      for (auto& a : actors) a.targets = all;
    }
    for (const auto& [u, v] : plan.graph.edges) {
      const int o = plan.owner[u];
      if (dap && plan.owner[v] != o) continue;  // threads share nothing
      actors[static_cast<std::size_t>(o)].edges.emplace_back(id_of(u), id_of(v));
    }

    auto setup = [&](int t) {
      Actor& a = actors[static_cast<std::size_t>(t)];
      Store& s = store_of(t);
      if (a.actors.empty()) {
        // No initial user hashed to this thread; give it a fresh one.
        const Id u = fresh_id(a.fresh++, t);
        s.add_user(t, u);
        a.actors.push_back(u);
        if (dap) a.targets.push_back(u);
      }
      const double exponent = zipf_exponent(cfg.alpha);
      a.pick_actor.emplace(a.actors.size(), exponent);
      if (!a.targets.empty()) a.pick_target.emplace(a.targets.size(), exponent);
      for (const auto& [u, v] : a.edges) s.follow(t, u, v);
      a.buf.reserve(cfg.timeline_cap);
    };

    auto batch = [&](int t, std::size_t n, WorkerStats& st, bool measured) {
      Actor& a = actors[static_cast<std::size_t>(t)];
      Store& s = store_of(t);
      std::uniform_int_distribution<int> percent(0, 99);
      for (std::size_t i = 0; i < n; ++i) {
        const int p = percent(a.rng);
        std::size_t kind = 0;
        while (p >= cumulative[kind + 1]) ++kind;
        const Id u = a.actors[(*a.pick_actor)(a.rng) - 1];
        std::uint64_t target = 0, outcome = 0;
        switch (static_cast<RetwisOp>(kind)) {
          case RetwisOp::AddUser: {
            const Id fresh = fresh_id(a.fresh++, t);
            s.add_user(t, fresh);
            target = static_cast<std::uint64_t>(fresh);
            break;
          }
          case RetwisOp::Follow: {
            if (!a.pick_target || a.targets.size() < 2) break;
            Id v = u;
            while (v == u) v = a.targets[(*a.pick_target)(a.rng) - 1];
            target = static_cast<std::uint64_t>(v);
            const bool had = s.follows(t, u, v);
            outcome = had ? 1 : 0;
            if (had) {
              s.unfollow(t, u, v);
            } else {
              s.follow(t, u, v);
            }
            // The converse keeps the graph stable and is not measured.
            const auto c0 = Clock::now();
            if (had) {
              s.follow(t, u, v);
            } else {
              s.unfollow(t, u, v);
            }
            if (measured) st.excluded += std::chrono::duration<double>(Clock::now() - c0).count();
            break;
          }
          case RetwisOp::Post:
            outcome = s.post(t, u, Msg{u, a.posts++}, cfg.eager_fanout);
            break;
          case RetwisOp::Timeline:
            s.timeline(t, u, cfg.timeline_cap, a.buf);
            a.longest = std::max(a.longest, a.buf.size());
            outcome = a.buf.size();
            break;
          case RetwisOp::Group:
            outcome = s.toggle_group(t, u) ? 1 : 0;
            break;
          case RetwisOp::Profile: {
            const auto value = static_cast<std::int64_t>(a.rng() >> 1);
            s.update_profile(t, u, value);
            target = static_cast<std::uint64_t>(value);
            break;
          }
        }
        a.digest = mix_digest(a.digest, kind);
        a.digest = mix_digest(a.digest, static_cast<std::uint64_t>(u));
        a.digest = mix_digest(a.digest, target);
        a.digest = mix_digest(a.digest, outcome);
        if (measured) ++st.mix[kind];
      }
    };

    RunTiming timing{cfg.warmup, cfg.duration, cfg.batch, cfg.max_ops};
    std::vector<WorkerStats> stats;
    run_workers(T, timing, kRetwisOps, setup, batch, stats);
    collect_run(report, run, stats, kind_names);
    if (run + 1 == cfg.runs) {
      std::vector<Store*> raw;
      for (auto& s : stores) raw.push_back(s.get());
      audit(raw, actors, cfg.timeline_cap, result.audit);
      for (const auto& a : actors) result.digests.push_back(a.digest);
    }
    stores.clear();
    reclaim::collect();
  }
  finalize(report);
  report.extra["variant"] = cfg.variant;
  report.extra["users"] = cfg.users;
  report.extra["alpha"] = cfg.alpha;
  report.extra["edges"] = plan.graph.edges.size();
  report.extra["mix_percent"] = cfg.mix;
  report.extra["timeline_cap"] = cfg.timeline_cap;
  report.extra["eager_fanout"] = cfg.eager_fanout;
  report.extra["audit_ok"] = result.audit.ok();
  report.extra["longest_timeline"] = result.audit.longest_timeline;
  auto& digests = report.extra["digests"] = nlohmann::json::array();
  for (auto d : result.digests) {
    std::ostringstream h;
    h << std::hex << d;
    digests.push_back(h.str());
  }
  return result;
}

}  // namespace adjusted::bench
