// Wing & Gong style search with Lowe's memoisation: repeatedly pick a call
// that no unlinearized completed call precedes in real time, apply it, and
// cache (linearized set, state) pairs already shown to fail.

#include "adjusted/linearizer.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace adjusted::lin {

std::optional<std::string> well_formed(const History& h) {
  std::map<int, bool> open;  // thread -> has pending invocation
  std::map<int, const Event*> last_invoke;
  for (std::size_t i = 0; i < h.events.size(); ++i) {
    const Event& e = h.events[i];
    if (i > 0 && h.events[i - 1].ts >= e.ts) {
      return "event " + std::to_string(i) + ": timestamps not strictly increasing";
    }
    bool& busy = open[e.thread];
    if (e.kind == EventKind::Invoke) {
      if (busy) return "event " + std::to_string(i) + ": thread " + std::to_string(e.thread) +
                       " invokes while a call is pending";
      busy = true;
      last_invoke[e.thread] = &e;
    } else {
      if (!busy) return "event " + std::to_string(i) + ": response without invocation";
      const Event* inv = last_invoke[e.thread];
      if (inv->op.name != e.op.name || inv->op.args != e.op.args) {
        return "event " + std::to_string(i) + ": response does not match the pending " +
               inv->op.text();
      }
      busy = false;
    }
  }
  return std::nullopt;
}

std::vector<Call> calls(const History& h) {
  std::vector<Call> out;
  std::map<int, std::size_t> pending;
  for (std::size_t i = 0; i < h.events.size(); ++i) {
    const Event& e = h.events[i];
    if (e.kind == EventKind::Invoke) {
      pending[e.thread] = out.size();
      out.push_back({e.thread, e.op, i, std::nullopt, std::nullopt});
    } else {
      Call& c = out[pending.at(e.thread)];
      c.respond = i;
      c.resp = e.resp;
      pending.erase(e.thread);
    }
  }
  return out;
}

History prefix(const History& h, std::size_t events) {
  History p;
  p.object = h.object;
  p.events.assign(h.events.begin(),
                  h.events.begin() + static_cast<std::ptrdiff_t>(std::min(events, h.events.size())));
  return p;
}

namespace {

struct Search {
  const DataTypeSpec& spec;
  const std::vector<Call>& cs;
  std::uint64_t completed_mask = 0;
  std::vector<std::uint64_t> preceded_by;  // completed calls that must come first
  std::unordered_set<std::string> failed;
  std::vector<std::size_t> order;
  std::vector<Response> responses;
  std::size_t explored = 0;

  Search(const DataTypeSpec& s, const std::vector<Call>& c) : spec(s), cs(c), preceded_by(c.size(), 0) {
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (cs[i].respond) completed_mask |= std::uint64_t{1} << i;
      for (std::size_t j = 0; j < cs.size(); ++j) {
        if (cs[j].respond && *cs[j].respond < cs[i].invoke) preceded_by[i] |= std::uint64_t{1} << j;
      }
    }
  }

  bool run(const State& s, std::uint64_t done) {
    if ((done & completed_mask) == completed_mask) return true;
    std::string key = std::to_string(done) + "|" + s.encode();
    if (failed.count(key)) return false;
    ++explored;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (done & bit) continue;
      if ((preceded_by[i] & ~done) != 0) continue;
      auto o = apply(spec, s, cs[i].op);
      if (cs[i].resp && !(o.response == *cs[i].resp)) continue;
      order.push_back(i);
      responses.push_back(o.response);
      if (run(o.state, done | bit)) return true;
      order.pop_back();
      responses.pop_back();
    }
    failed.insert(std::move(key));
    return false;
  }
};

CheckResult check_once(const History& h, const DataTypeSpec& spec, const State& init) {
  const auto cs = calls(h);
  Search search(spec, cs);
  CheckResult r;
  r.linearizable = search.run(init, 0);
  r.explored = search.explored;
  if (r.linearizable) r.witness = Witness{search.order, search.responses};
  return r;
}

}  // namespace

CheckResult check(const History& h, const DataTypeSpec& spec, const CheckOptions& opt) {
  return check(h, spec, spec.init_state, opt);
}

CheckResult check(const History& h, const DataTypeSpec& spec, const State& init,
                  const CheckOptions& opt) {
  if (auto err = well_formed(h)) throw UsageError("malformed history: " + *err);
  const auto cs = calls(h);
  const auto completed =
      static_cast<std::size_t>(std::count_if(cs.begin(), cs.end(), [](const Call& c) { return c.respond.has_value(); }));
  if (completed > opt.max_completed) {
    throw UsageError("history has " + std::to_string(completed) + " completed calls, above the bound of " +
                     std::to_string(opt.max_completed) + "; truncate it or raise the bound");
  }
  if (cs.size() > 64) throw UsageError("history has more than 64 calls");
  for (const auto& c : cs) spec.at(c.op.name);  // unknown templates are usage errors

  CheckResult r = check_once(h, spec, init);
  if (r.linearizable) return r;
  // Non-linearizability is preserved by extension, so the shortest failing
  // prefix can be found by bisection.
  std::size_t lo = 0, hi = h.events.size();  // prefix(lo) passes, prefix(hi) fails
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (check_once(prefix(h, mid), spec, init).linearizable) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  r.violating_prefix = hi;
  return r;
}

bool verify_witness(const History& h, const DataTypeSpec& spec, const State& init,
                    const Witness& w) {
  const auto cs = calls(h);
  std::vector<bool> seen(cs.size(), false);
  for (std::size_t i : w.order) {
    if (i >= cs.size() || seen[i]) return false;
    seen[i] = true;
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].respond && !seen[i]) return false;
  }
  // real-time order
  for (std::size_t a = 0; a < w.order.size(); ++a) {
    for (std::size_t b = a + 1; b < w.order.size(); ++b) {
      const Call& later = cs[w.order[a]];
      const Call& earlier = cs[w.order[b]];
      if (earlier.respond && *earlier.respond < later.invoke) return false;
    }
  }
  std::vector<OpInstance> seq;
  for (std::size_t i : w.order) seq.push_back(cs[i].op);
  if (seq.empty()) return true;
  const auto replay = apply_seq(spec, init, seq);
  for (std::size_t p = 0; p < seq.size(); ++p) {
    const Call& c = cs[w.order[p]];
    if (c.resp && !(replay.responses[p] == *c.resp)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::uint64_t tick() {
  static std::atomic<std::uint64_t> clock{1};
  return clock.fetch_add(1, std::memory_order_seq_cst);
}

Recorder::Recorder(int threads, std::string object)
    : object_(std::move(object)), buffers_(static_cast<std::size_t>(threads)) {
  for (auto& b : buffers_) b.events.reserve(64);
}

History Recorder::history() const {
  History h;
  h.object = object_;
  for (const auto& b : buffers_) {
    for (std::size_t i = 1; i < b.events.size(); ++i) {
      if (b.events[i - 1].ts >= b.events[i].ts) throw std::logic_error("recorder clock went backwards");
    }
    h.events.insert(h.events.end(), b.events.begin(), b.events.end());
  }
  std::sort(h.events.begin(), h.events.end(), [](const Event& a, const Event& b) { return a.ts < b.ts; });
  return h;
}

}  // namespace adjusted::lin
