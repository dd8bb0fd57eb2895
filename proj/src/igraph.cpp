#include "adjusted/igraph.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#ifdef ADJUSTED_HAVE_OPENMP
#include <omp.h>
#endif

namespace adjusted::igraph {
namespace {

// Trace with states interned to small integers (per graph).
struct IdTrace {
  std::vector<Response> resp;
  std::vector<int> state;  // state id after each position
};

class Interner {
 public:
  int id(const State& s) {
    auto [it, fresh] = ids_.try_emplace(s, static_cast<int>(ids_.size()));
    return it->second;
  }

 private:
  std::unordered_map<State, int, StateHash> ids_;
};

IdTrace id_trace(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
                 const Perm& x, Interner& in) {
  IdTrace t;
  t.resp.reserve(x.size());
  t.state.reserve(x.size());
  State s = start;
  for (int i : x) {
    auto o = apply(spec, s, bag[static_cast<std::size_t>(i)]);
    s = std::move(o.state);
    t.resp.push_back(o.response);
    t.state.push_back(in.id(s));
  }
  return t;
}

std::vector<std::size_t> positions(const Perm& x) {
  std::vector<std::size_t> pos(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) pos[static_cast<std::size_t>(x[p])] = p;
  return pos;
}

bool indist_at(const IdTrace& a, std::size_t pa, const IdTrace& b, std::size_t pb,
               IndistMode mode) {
  if (!(a.resp[pa] == b.resp[pb])) return false;
  switch (mode) {
    case IndistMode::OneShot:
      return true;
    case IndistMode::ImmediateState:
      return a.state[pa] == b.state[pb];
    case IndistMode::LongLived:
      break;
  }
  for (std::size_t i = pa; i < a.state.size(); ++i) {
    for (std::size_t j = pb; j < b.state.size(); ++j) {
      if (a.state[i] == b.state[j]) return true;
    }
  }
  return false;
}

void check_bound(std::size_t n, std::size_t bound) {
  if (n > bound) {
    throw UsageError("bag of " + std::to_string(n) + " operations exceeds the factorial bound " +
                     std::to_string(bound));
  }
}

std::vector<Perm> all_permutations(std::size_t n) {
  std::vector<Perm> out;
  Perm p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Runs body(i) for i in [0, n), serially or with OpenMP.
template <class F>
void for_each_index(std::size_t n, Execution exec, F&& body) {
#ifdef ADJUSTED_HAVE_OPENMP
  if (exec == Execution::Parallel) {
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<EdgeLabel> IGraph::label(int u, int v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{u, v},
                             [](const Edge& e, const std::pair<int, int>& k) {
                               return std::pair{e.u, e.v} < k;
                             });
  if (it == edges.end() || it->u != u || it->v != v) return std::nullopt;
  return it->label;
}

std::string IGraph::node_name(int n) const {
  std::string s;
  for (int i : nodes[static_cast<std::size_t>(n)]) s.push_back(static_cast<char>('a' + i));
  return s;
}

Trace trace(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
            const Perm& x) {
  Trace t;
  State s = start;
  for (int i : x) {
    auto o = apply(spec, s, bag[static_cast<std::size_t>(i)]);
    s = std::move(o.state);
    t.responses.push_back(o.response);
    t.after.push_back(s);
  }
  return t;
}

Indist indist(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
              const Perm& x, const Perm& y, int op, IndistMode mode) {
  Interner in;
  auto tx = id_trace(spec, start, bag, x, in);
  auto ty = id_trace(spec, start, bag, y, in);
  const auto px = positions(x)[static_cast<std::size_t>(op)];
  const auto py = positions(y)[static_cast<std::size_t>(op)];
  Indist r;
  r.indist = indist_at(tx, px, ty, py, mode);
  r.strong = r.indist && tx.state.back() == ty.state.back();
  return r;
}

IGraph build_graph(const DataTypeSpec& spec, const State& start, std::vector<OpInstance> bag,
                   IndistMode mode, std::size_t factorial_bound) {
  check_bound(bag.size(), factorial_bound);
  if (bag.size() > 64) throw UsageError("bags are limited to 64 operations");
  IGraph g;
  g.spec_name = spec.name;
  g.start = start;
  g.bag = std::move(bag);
  g.mode = mode;
  g.nodes = all_permutations(g.bag.size());

  Interner in;
  std::vector<IdTrace> traces;
  std::vector<std::vector<std::size_t>> pos;
  traces.reserve(g.nodes.size());
  for (const auto& x : g.nodes) {
    traces.push_back(id_trace(spec, start, g.bag, x, in));
    pos.push_back(positions(x));
  }
  const auto n = static_cast<int>(g.nodes.size());
  const auto m = g.bag.size();
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const auto& a = traces[static_cast<std::size_t>(u)];
      const auto& b = traces[static_cast<std::size_t>(v)];
      const bool same_final = a.state.empty() || a.state.back() == b.state.back();
      EdgeLabel lab;
      for (std::size_t op = 0; op < m; ++op) {
        if (indist_at(a, pos[static_cast<std::size_t>(u)][op], b, pos[static_cast<std::size_t>(v)][op],
                      mode)) {
          lab.labels |= Mask{1} << op;
          if (same_final) lab.strong |= Mask{1} << op;
        }
      }
      if (lab.labels) g.edges.push_back({u, v, lab});
    }
  }
  return g;
}

std::vector<std::vector<int>> classes(const IGraph& g) {
  std::vector<int> parent(g.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& e : g.edges) {
    auto a = find(e.u), b = find(e.v);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<std::vector<int>> out;
  std::unordered_map<int, std::size_t> slot;
  for (int x = 0; x < static_cast<int>(g.nodes.size()); ++x) {
    auto r = find(x);
    auto [it, fresh] = slot.try_emplace(r, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(x);
  }
  return out;
}

bool is_labeling(const IGraph& g, int op) {
  if (g.edges.size() != g.pair_count()) return false;
  const Mask bit = Mask{1} << op;
  return std::all_of(g.edges.begin(), g.edges.end(),
                     [bit](const Edge& e) { return (e.label.labels & bit) != 0; });
}

bool is_strongly_labeling(const IGraph& g, int op) {
  if (g.edges.size() != g.pair_count()) return false;
  const Mask bit = Mask{1} << op;
  return std::all_of(g.edges.begin(), g.edges.end(),
                     [bit](const Edge& e) { return (e.label.strong & bit) != 0; });
}

bool bag_labeling(const IGraph& g) {
  for (int i = 0; i < static_cast<int>(g.bag.size()); ++i) {
    if (!is_labeling(g, i)) return false;
  }
  return true;
}

bool bag_strongly_labeling(const IGraph& g) {
  for (int i = 0; i < static_cast<int>(g.bag.size()); ++i) {
    if (!is_strongly_labeling(g, i)) return false;
  }
  return true;
}

Perm swap_adjacent(Perm x, std::size_t i) {
  std::swap(x[i - 1], x[i]);
  return x;
}

bool left_moves(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
                const Perm& x, std::size_t i, IndistMode mode) {
  if (i == 0 || i >= x.size()) return false;
  auto r = indist(spec, start, bag, x, swap_adjacent(x, i), x[i], mode);
  return r.strong;
}

bool right_moves(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
                 const Perm& x, std::size_t i, IndistMode mode) {
  if (i == 0 || i >= x.size()) return false;
  auto r = indist(spec, start, bag, x, swap_adjacent(x, i), x[i - 1], mode);
  return r.strong;
}

namespace {

MoverVerdict quantify_mover(const DataTypeSpec& spec, const std::string& tmpl,
                            const std::vector<State>& states,
                            const std::vector<std::vector<OpInstance>>& bags, Execution exec,
                            bool left) {
  struct Job {
    std::size_t checked = 0;
    std::optional<MoverWitness> cex;
  };
  const std::size_t jobs = states.size() * bags.size();
  std::vector<Job> results(jobs);
  for_each_index(jobs, exec, [&](std::size_t j) {
    const auto& s = states[j / bags.size()];
    const auto& bag = bags[j % bags.size()];
    if (bag.size() < 2) return;
    auto g = build_graph(spec, s, bag, IndistMode::LongLived, bag.size());
    std::map<Perm, int> index;
    for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) index[g.nodes[static_cast<std::size_t>(n)]] = n;
    auto& out = results[j];
    for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) {
      const auto& x = g.nodes[static_cast<std::size_t>(n)];
      for (std::size_t i = 1; i < x.size(); ++i) {
        const int subject = left ? x[i] : x[i - 1];
        const int mover = x[i];
        if (g.bag[static_cast<std::size_t>(mover)].name != tmpl) continue;
        ++out.checked;
        auto lab = g.label(n, index.at(swap_adjacent(x, i)));
        const bool ok = lab && (lab->strong & (Mask{1} << subject));
        if (!ok && !out.cex) out.cex = MoverWitness{s, bag, x, i};
      }
    }
  });
  MoverVerdict v;
  for (auto& r : results) {
    v.checked += r.checked;
    if (r.cex && !v.counterexample) {
      v.holds = false;
      v.counterexample = std::move(r.cex);
    }
  }
  return v;
}

}  // namespace

MoverVerdict is_left_mover(const DataTypeSpec& spec, const std::string& tmpl,
                           const std::vector<State>& states,
                           const std::vector<std::vector<OpInstance>>& bags, Execution exec) {
  return quantify_mover(spec, tmpl, states, bags, exec, true);
}

MoverVerdict is_right_mover(const DataTypeSpec& spec, const std::string& tmpl,
                            const std::vector<State>& states,
                            const std::vector<std::vector<OpInstance>>& bags, Execution exec) {
  return quantify_mover(spec, tmpl, states, bags, exec, false);
}

// ---------------------------------------------------------------------------

std::vector<std::vector<OpInstance>> enumerate_bags(const DataTypeSpec& spec, std::size_t k,
                                                    std::size_t cap) {
  const auto items = enumerate_items(spec);
  std::vector<std::vector<OpInstance>> out;
  if (k == 0 || items.empty()) return out;
  std::vector<std::size_t> idx(k, 0);
  while (out.size() < cap) {
    std::vector<OpInstance> bag;
    bag.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      auto op = items[idx[i]];
      op.id = static_cast<int>(i);
      bag.push_back(std::move(op));
    }
    out.push_back(std::move(bag));
    // next non-decreasing index vector
    std::size_t p = k;
    while (p > 0 && idx[p - 1] == items.size() - 1) --p;
    if (p == 0) break;
    ++idx[p - 1];
    for (std::size_t q = p; q < k; ++q) idx[q] = idx[p - 1];
  }
  return out;
}

BagGenerator default_bags(const DataTypeSpec& spec, std::size_t cap) {
  return [&spec, cap](std::size_t k) { return enumerate_bags(spec, k, cap); };
}

DistResult dist_classify(const DataTypeSpec& spec, std::size_t k, const std::vector<State>& states,
                         const BagGenerator& bags, const GeneratorBounds& bounds) {
  if (k == 0) throw UsageError("dist_classify needs k >= 1");
  check_bound(k, bounds.factorial_bound);
  const auto bag_list = bags(k);
  const std::size_t jobs = states.size() * bag_list.size();
  std::vector<std::size_t> counts(jobs, 0);
  for_each_index(jobs, bounds.exec, [&](std::size_t j) {
    const auto& bag = bag_list[j % bag_list.size()];
    auto g = build_graph(spec, states[j / bag_list.size()], bag, bounds.mode,
                         bounds.factorial_bound);
    counts[j] = classes(g).size();
  });
  DistResult r;
  r.k = k;
  r.graphs = jobs;
  for (std::size_t j = 0; j < jobs; ++j) {
    if (counts[j] > r.l) {
      r.l = counts[j];
      r.witness_state = states[j / bag_list.size()];
      r.witness_bag = bag_list[j % bag_list.size()];
    }
  }
  return r;
}

ConsensusEstimate consensus_bound(const DataTypeSpec& spec, std::size_t kmax,
                                  const std::vector<State>& states, const BagGenerator& bags,
                                  const GeneratorBounds& bounds) {
  if (!spec.readable()) {
    throw UsageError("consensus bound needs a readable type: " + spec.name +
                     " declares no read operation (the dist/consensus correspondence assumes one)");
  }
  if (kmax < 2) throw UsageError("consensus bound needs kmax >= 2");
  ConsensusEstimate est;
  est.bounds = bounds;
  est.state_count = states.size();
  for (std::size_t k = 1; k <= kmax; ++k) {
    est.per_k.push_back(dist_classify(spec, k, states, bags, bounds));
    if (est.per_k.back().l >= 2) est.value = k;
  }
  return est;
}

// ---------------------------------------------------------------------------

std::string to_string(PairClass c) {
  switch (c) {
    case PairClass::Overwriting:
      return "overwriting";
    case PairClass::WeaklyCommuting:
      return "weakly_commuting";
    case PairClass::Neither:
      return "neither";
  }
  return "?";
}

PairClass classify_pair(const DataTypeSpec& spec, const OpInstance& c, const OpInstance& d,
                        const std::vector<State>& states) {
  bool overwriting = true;
  bool weakly = true;
  for (const auto& s : states) {
    const auto c0 = apply(spec, s, c);
    const auto d0 = apply(spec, s, d);
    const auto cd = apply(spec, c0.state, d);  // d after c
    const auto dc = apply(spec, d0.state, c);  // c after d
    auto same = [](const Outcome& a, const Outcome& b) {
      return a.state == b.state && a.response == b.response;
    };
    // each order ends as if the later operation ran alone
    if (!same(cd, d0) || !same(dc, c0)) overwriting = false;
    const bool c_unaffected = c0.response == dc.response;
    const bool d_unaffected = d0.response == cd.response;
    if (!(cd.state == dc.state && (c_unaffected || d_unaffected))) weakly = false;
  }
  if (overwriting) return PairClass::Overwriting;
  if (weakly) return PairClass::WeaklyCommuting;
  return PairClass::Neither;
}

PermissiveReport is_permissive(const DataTypeSpec& spec, const std::vector<State>& states) {
  std::vector<OpInstance> writes;
  for (const auto& op : enumerate_items(spec)) {
    if (spec.at(op.name).role != Role::Reader) writes.push_back(op);
  }
  PermissiveReport r;
  for (std::size_t i = 0; i < writes.size(); ++i) {
    for (std::size_t j = i; j < writes.size(); ++j) {
      if (classify_pair(spec, writes[i], writes[j], states) == PairClass::Neither) {
        r.permissive = false;
        r.offending = {writes[i], writes[j]};
        return r;
      }
    }
  }
  return r;
}

bool graph_included(const IGraph& base, const IGraph& adjusted) {
  if (base.nodes != adjusted.nodes) return false;
  for (const auto& e : base.edges) {
    auto lab = adjusted.label(e.u, e.v);
    if (!lab) return false;
    if ((e.label.labels & ~lab->labels) != 0) return false;
  }
  return true;
}

}  // namespace adjusted::igraph
