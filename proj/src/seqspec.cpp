#include "adjusted/seqspec.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_set>

namespace adjusted {

std::string to_string(const Response& r) {
  switch (r.kind) {
    case Response::Kind::Void:
      return "void";
    case Response::Kind::Bottom:
      return "⊥";
    case Response::Kind::Value:
      break;
  }
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Datum::Nil>) {
          return "nil";
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return std::to_string(v);
        }
      },
      r.value.v);
}

nlohmann::json to_json(const Response& r) {
  switch (r.kind) {
    case Response::Kind::Void:
      return "void";
    case Response::Kind::Bottom:
      return "bottom";
    case Response::Kind::Value:
      break;
  }
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Datum::Nil>) {
          return nullptr;
        } else {
          return v;
        }
      },
      r.value.v);
}

Response response_from_json(const nlohmann::json& j) {
  if (j.is_null()) return Response::of(Datum::nil());
  if (j.is_boolean()) return Response::of_bool(j.get<bool>());
  if (j.is_number_integer()) return Response::of_int(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "void") return Response::none();
    if (s == "bottom" || s == "⊥") return Response::bottom();
  }
  throw UsageError("unrecognised response: " + j.dump());
}

std::string State::encode() const {
  std::string out;
  out.reserve(cells.size() * 4 + 2);
  out.push_back('[');
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(cells[i]);
  }
  out.push_back(']');
  return out;
}

std::size_t StateHash::operator()(const State& s) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ s.cells.size();
  for (auto c : s.cells) {
    h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::string OpInstance::text() const {
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(args[i]);
  }
  return out + ")";
}

std::optional<std::size_t> DataTypeSpec::find(const std::string& tmpl) const {
  for (std::size_t i = 0; i < templates.size(); ++i) {
    if (templates[i].name == tmpl) return i;
  }
  return std::nullopt;
}

const OpTemplate& DataTypeSpec::at(const std::string& tmpl) const {
  auto i = find(tmpl);
  if (!i) throw UsageError("spec " + name + " has no operation '" + tmpl + "'");
  return templates[*i];
}

bool DataTypeSpec::readable() const {
  return std::any_of(templates.begin(), templates.end(),
                     [](const OpTemplate& t) { return t.role == Role::Reader; });
}

Outcome apply(const DataTypeSpec& spec, const State& state, const OpInstance& op) {
  auto idx = spec.find(op.name);
  if (!idx) throw UsageError("spec " + spec.name + " has no operation '" + op.name + "'");
  const auto& t = spec.templates[*idx];
  if (t.accepts && !t.accepts(op.args)) {
    throw UsageError("argument out of domain for " + spec.name + "." + op.text());
  }
  return spec.transition(state, *idx, op.args);
}

SeqOutcome apply_seq(const DataTypeSpec& spec, const State& state,
                     const std::vector<OpInstance>& seq) {
  SeqOutcome out{state, {}};
  out.responses.reserve(seq.size());
  for (const auto& op : seq) {
    auto o = apply(spec, out.state, op);
    out.state = std::move(o.state);
    out.responses.push_back(o.response);
  }
  return out;
}

std::vector<OpInstance> enumerate_items(const DataTypeSpec& spec) {
  std::vector<OpInstance> items;
  for (const auto& t : spec.templates) {
    for (const auto& a : t.domain) {
      items.push_back({t.name, a, static_cast<int>(items.size())});
    }
  }
  return items;
}

std::vector<State> reachable_states(const DataTypeSpec& spec, int depth) {
  const auto items = enumerate_items(spec);
  std::vector<State> order{spec.init_state};
  std::unordered_set<State, StateHash> seen{spec.init_state};
  std::deque<std::pair<State, int>> frontier{{spec.init_state, 0}};
  while (!frontier.empty()) {
    auto [s, d] = frontier.front();
    frontier.pop_front();
    if (d == depth) continue;
    for (const auto& op : items) {
      auto next = apply(spec, s, op).state;
      if (seen.insert(next).second) {
        order.push_back(next);
        frontier.emplace_back(std::move(next), d + 1);
      }
    }
  }
  return order;
}

// ---------------------------------------------------------------------------

std::string to_string(AccessClass c) {
  switch (c) {
    case AccessClass::ALL:
      return "ALL";
    case AccessClass::SWMR:
      return "SWMR";
    case AccessClass::MWSR:
      return "MWSR";
    case AccessClass::CWMR:
      return "CWMR";
    case AccessClass::CWSR:
      return "CWSR";
  }
  return "?";
}

AccessClass access_class_from_string(const std::string& s) {
  for (auto c : {AccessClass::ALL, AccessClass::SWMR, AccessClass::MWSR, AccessClass::CWMR,
                 AccessClass::CWSR}) {
    if (to_string(c) == s) return c;
  }
  throw UsageError("unknown access class: " + s);
}

bool PermissionMap::permits(int thread, const std::string& tmpl) const {
  auto it = per_thread.find(thread);
  return it != per_thread.end() && it->second.count(tmpl) > 0;
}

namespace {

std::set<std::string> names_with(const DataTypeSpec& spec, std::initializer_list<Role> roles) {
  std::set<std::string> out;
  for (const auto& t : spec.templates) {
    if (std::find(roles.begin(), roles.end(), t.role) != roles.end()) out.insert(t.name);
  }
  return out;
}

bool has_role(const DataTypeSpec& spec, Role r) {
  return std::any_of(spec.templates.begin(), spec.templates.end(),
                     [r](const OpTemplate& t) { return t.role == r; });
}

// Templates that define the "read side" for single-reader classes: consuming
// reads when the type has them, plain reads otherwise.
std::set<std::string> read_side(const DataTypeSpec& spec) {
  if (has_role(spec, Role::Consumer)) return names_with(spec, {Role::Consumer, Role::Reader});
  return names_with(spec, {Role::Reader});
}

}  // namespace

PermissionMap PermissionMap::all(const DataTypeSpec& spec, int threads) {
  PermissionMap m;
  auto every = names_with(spec, {Role::Reader, Role::Writer, Role::Consumer});
  for (int t = 0; t < threads; ++t) m.per_thread[t] = every;
  return m;
}

PermissionMap PermissionMap::swmr(const DataTypeSpec& spec, int threads, int writer) {
  PermissionMap m;
  m.access_class = AccessClass::SWMR;
  m.writer_thread = writer;
  auto readers = names_with(spec, {Role::Reader});
  for (int t = 0; t < threads; ++t) {
    m.per_thread[t] = t == writer ? names_with(spec, {Role::Reader, Role::Writer, Role::Consumer})
                                  : readers;
  }
  return m;
}

PermissionMap PermissionMap::mwsr(const DataTypeSpec& spec, int threads, int reader) {
  PermissionMap m;
  m.access_class = AccessClass::MWSR;
  m.writer_thread = reader;
  auto writers = names_with(spec, {Role::Writer});
  auto reads = read_side(spec);
  for (int t = 0; t < threads; ++t) {
    m.per_thread[t] = writers;
    if (t == reader) m.per_thread[t].insert(reads.begin(), reads.end());
  }
  return m;
}

PermissionMap PermissionMap::cwmr(const DataTypeSpec& spec, int threads) {
  auto m = all(spec, threads);
  m.access_class = AccessClass::CWMR;
  return m;
}

PermissionMap PermissionMap::cwsr(const DataTypeSpec& spec, int threads, int reader) {
  auto m = mwsr(spec, threads, reader);
  m.access_class = AccessClass::CWSR;
  return m;
}

std::optional<std::string> validate(const PermissionMap& pmap, const DataTypeSpec& spec) {
  for (const auto& t : spec.templates) {
    bool held = false;
    for (const auto& [tid, ops] : pmap.per_thread) held = held || ops.count(t.name);
    if (!held) return "operation " + t.name + " is executable by no thread";
  }
  for (const auto& [tid, ops] : pmap.per_thread) {
    for (const auto& op : ops) {
      if (!spec.find(op)) return "thread " + std::to_string(tid) + " holds unknown operation " + op;
    }
  }
  auto holders = [&](const std::set<std::string>& names) {
    std::set<int> out;
    for (const auto& [tid, ops] : pmap.per_thread) {
      for (const auto& n : names) {
        if (ops.count(n)) out.insert(tid);
      }
    }
    return out;
  };
  switch (pmap.access_class) {
    case AccessClass::ALL:
    case AccessClass::CWMR:
      break;
    case AccessClass::SWMR: {
      auto w = holders(names_with(spec, {Role::Writer, Role::Consumer}));
      if (w.size() != 1) return "SWMR requires exactly one writer thread";
      if (pmap.writer_thread && *w.begin() != *pmap.writer_thread) {
        return "SWMR writer does not match writer_thread";
      }
      break;
    }
    case AccessClass::MWSR:
    case AccessClass::CWSR: {
      auto r = holders(read_side(spec));
      if (r.size() != 1) return to_string(pmap.access_class) + " requires exactly one reader thread";
      if (pmap.writer_thread && *r.begin() != *pmap.writer_thread) {
        return to_string(pmap.access_class) + " reader does not match writer_thread";
      }
      break;
    }
  }
  return std::nullopt;
}

bool strongly_commute(const DataTypeSpec& spec, const State& s, const OpInstance& c,
                      const OpInstance& d) {
  auto cd = apply_seq(spec, s, {c, d});
  auto dc = apply_seq(spec, s, {d, c});
  return cd.state == dc.state && cd.responses[0] == dc.responses[1] &&
         cd.responses[1] == dc.responses[0];
}

bool complies(const std::vector<std::pair<int, OpInstance>>& bag, const PermissionMap& pmap,
              const DataTypeSpec& spec, const std::vector<State>* states) {
  std::set<int> seen;
  for (const auto& [tid, op] : bag) {
    if (!seen.insert(tid).second) return false;
    if (!pmap.permits(tid, op.name)) return false;
  }
  if (pmap.access_class != AccessClass::CWMR && pmap.access_class != AccessClass::CWSR) {
    return true;
  }
  std::vector<State> local;
  if (!states) {
    local = reachable_states(spec, 3);
    states = &local;
  }
  std::vector<const OpInstance*> writers;
  for (const auto& [tid, op] : bag) {
    if (spec.at(op.name).role != Role::Reader) writers.push_back(&op);
  }
  for (std::size_t i = 0; i < writers.size(); ++i) {
    for (std::size_t j = i + 1; j < writers.size(); ++j) {
      for (const auto& s : *states) {
        if (!strongly_commute(spec, s, *writers[i], *writers[j])) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

AdjustReport check_adjusts(const DataTypeSpec& adjusted, const DataTypeSpec& base,
                           const std::vector<State>& state_sample, const ArgGrid& arg_sample) {
  AdjustReport rep;
  rep.adjusted = adjusted.name;
  rep.base = base.name;
  for (const auto& t : base.templates) {
    if (!adjusted.find(t.name)) {
      rep.narrowness = false;
      rep.missing_templates.push_back(t.name);
    }
  }
  for (const auto& t : adjusted.templates) {
    OpVerdict v;
    v.name = t.name;
    if (!base.find(t.name)) {
      rep.verdicts.push_back(v);
      continue;
    }
    auto grid_it = arg_sample.find(t.name);
    const auto& grid = grid_it != arg_sample.end() ? grid_it->second : t.domain;
    for (const auto& s : state_sample) {
      for (const auto& args : grid) {
        OpInstance op{t.name, args, 0};
        auto want = apply(adjusted, s, op);
        if (want.response.is_bottom()) continue;  // adjusted precondition does not hold
        ++v.checked;
        auto got = apply(base, s, op);
        if (got.response.is_bottom()) {
          v.pre_implication = false;
          rep.counterexamples.push_back({s, op, want, got, "base precondition fails"});
          continue;
        }
        bool state_ok = got.state == want.state;
        bool resp_ok = want.response.is_void() || got.response == want.response;
        if (!state_ok || !resp_ok) {
          v.post_implication = false;
          rep.counterexamples.push_back(
              {s, op, want, got, state_ok ? "response not admitted" : "state differs"});
        }
      }
    }
    rep.verdicts.push_back(v);
  }
  rep.pass = rep.narrowness && std::all_of(rep.verdicts.begin(), rep.verdicts.end(),
                                           [](const OpVerdict& v) { return v.pass(); });
  return rep;
}

bool permissions_included(const PermissionMap& adjusted, const PermissionMap& base) {
  for (const auto& [tid, ops] : adjusted.per_thread) {
    for (const auto& op : ops) {
      if (!base.permits(tid, op)) return false;
    }
  }
  return true;
}

nlohmann::json to_json(const AdjustReport& r, const DataTypeSpec& base) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["adjusted"] = r.adjusted;
  j["base"] = r.base;
  j["narrowness"] = r.narrowness;
  j["missing_templates"] = r.missing_templates;
  j["pass"] = r.pass;
  auto& verdicts = j["verdicts"] = nlohmann::json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"op", v.name},
                        {"pre_implication", v.pre_implication},
                        {"post_implication", v.post_implication},
                        {"checked", v.checked}});
  }
  auto& cex = j["counterexamples"] = nlohmann::json::array();
  for (const auto& c : r.counterexamples) {
    cex.push_back({{"state", base.state_to_json(c.state)},
                   {"op", c.op.text()},
                   {"expected",
                    {{"state", base.state_to_json(c.expected.state)},
                     {"response", to_json(c.expected.response)}}},
                   {"got",
                    {{"state", base.state_to_json(c.got.state)},
                     {"response", to_json(c.got.response)}}},
                   {"reason", c.reason}});
  }
  return j;
}

nlohmann::json spec_to_json(const DataTypeSpec& spec) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["name"] = spec.name;
  j["init"] = spec.state_to_json(spec.init_state);
  auto& ops = j["operations"] = nlohmann::json::array();
  for (const auto& t : spec.templates) {
    const char* role = t.role == Role::Reader ? "reader" : t.role == Role::Writer ? "writer" : "consumer";
    ops.push_back({{"name", t.name}, {"role", role}, {"domain", t.domain}});
  }
  return j;
}

}  // namespace adjusted
