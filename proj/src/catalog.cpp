// Catalog data types. Failed preconditions (and operations whose
// postcondition was voided) return ⊥ and keep the state.

#include <algorithm>

#include "adjusted/seqspec.hpp"

namespace adjusted {
namespace {

using Cells = std::vector<std::int64_t>;

Outcome keep(const State& s, Response r) { return {s, r}; }
Outcome fail(const State& s) { return {s, Response::bottom()}; }

std::vector<Args> unary(const std::vector<std::int64_t>& elems) {
  std::vector<Args> out;
  for (auto e : elems) out.push_back({e});
  return out;
}

std::vector<Args> binary(const std::vector<std::int64_t>& elems) {
  std::vector<Args> out;
  for (auto a : elems)
    for (auto b : elems) out.push_back({a, b});
  return out;
}

const std::vector<Args> kNullary{Args{}};

bool arity0(const Args& a) { return a.empty(); }
bool arity1(const Args& a) { return a.size() == 1; }
bool arity2(const Args& a) { return a.size() == 2; }

// --- counters ---------------------------------------------------------------

enum class Flavor { C1, C2, C3 };

DataTypeSpec counter(const std::string& name, Flavor f, const CatalogParams& p) {
  DataTypeSpec spec;
  spec.name = name;
  spec.init_state = State{{0}};
  spec.templates = {
      {"rmw", Role::Writer, unary(p.elements), arity1},
      {"inc", Role::Writer, kNullary,
       [](const Args& a) { return a.empty() || (a.size() == 1 && a[0] > 0); }},
      {"get", Role::Reader, kNullary, arity0},
      {"reset", Role::Writer, kNullary, arity0},
  };
  spec.transition = [f](const State& s, std::size_t t, const Args& a) -> Outcome {
    const std::int64_t v = s.cells[0];
    switch (t) {
      case 0:  // rmw with f = addition
        if (f != Flavor::C1) return fail(s);
        return {State{{v + a[0]}}, Response::of_int(v + a[0])};
      case 1: {
        const std::int64_t next = v + (a.empty() ? 1 : a[0]);
        return {State{{next}}, f == Flavor::C3 ? Response::none() : Response::of_int(next)};
      }
      case 2:
        return keep(s, Response::of_int(v));
      default:
        if (f != Flavor::C1) return fail(s);
        return {State{{0}}, Response::none()};
    }
  };
  spec.state_to_json = [](const State& s) { return nlohmann::json(s.cells.at(0)); };
  spec.state_from_json = [](const nlohmann::json& j) {
    if (!j.is_number_integer()) throw UsageError("counter state must be an integer");
    return State{{j.get<std::int64_t>()}};
  };
  return spec;
}

// --- sets -------------------------------------------------------------------

DataTypeSpec set_type(const std::string& name, Flavor f, const CatalogParams& p) {
  DataTypeSpec spec;
  spec.name = name;
  spec.init_state = State{};
  spec.templates = {
      {"add", Role::Writer, unary(p.elements), arity1},
      {"remove", Role::Writer, unary(p.elements), arity1},
      {"contains", Role::Reader, unary(p.elements), arity1},
  };
  spec.transition = [f](const State& s, std::size_t t, const Args& a) -> Outcome {
    const auto& c = s.cells;
    auto pos = std::lower_bound(c.begin(), c.end(), a[0]);
    const bool present = pos != c.end() && *pos == a[0];
    switch (t) {
      case 0: {
        Cells next = c;
        if (!present) next.insert(next.begin() + (pos - c.begin()), a[0]);
        return {State{std::move(next)},
                f == Flavor::C1 ? Response::of_bool(!present) : Response::none()};
      }
      case 1: {
        if (f == Flavor::C3) return fail(s);
        Cells next = c;
        if (present) next.erase(next.begin() + (pos - c.begin()));
        return {State{std::move(next)},
                f == Flavor::C1 ? Response::of_bool(present) : Response::none()};
      }
      default:
        return keep(s, Response::of_bool(present));
    }
  };
  spec.state_to_json = [](const State& s) { return nlohmann::json(s.cells); };
  spec.state_from_json = [](const nlohmann::json& j) {
    if (!j.is_array()) throw UsageError("set state must be an array");
    Cells c = j.get<Cells>();
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return State{std::move(c)};
  };
  return spec;
}

// --- queue ------------------------------------------------------------------

DataTypeSpec queue_type(const CatalogParams& p) {
  DataTypeSpec spec;
  spec.name = "Q1";
  spec.init_state = State{};
  spec.templates = {
      {"offer", Role::Writer, unary(p.elements), arity1},
      {"poll", Role::Consumer, kNullary, arity0},
      {"contains", Role::Reader, unary(p.elements), arity1},
  };
  spec.transition = [](const State& s, std::size_t t, const Args& a) -> Outcome {
    const auto& c = s.cells;
    switch (t) {
      case 0: {
        Cells next = c;
        next.push_back(a[0]);
        return {State{std::move(next)}, Response::none()};
      }
      case 1: {
        if (c.empty()) return fail(s);
        return {State{Cells(c.begin() + 1, c.end())}, Response::of_int(c.front())};
      }
      default:
        return keep(s, Response::of_bool(std::find(c.begin(), c.end(), a[0]) != c.end()));
    }
  };
  spec.state_to_json = [](const State& s) { return nlohmann::json(s.cells); };
  spec.state_from_json = [](const nlohmann::json& j) {
    if (!j.is_array()) throw UsageError("queue state must be an array");
    return State{j.get<Cells>()};
  };
  return spec;
}

// --- reference --------------------------------------------------------------
// cells empty = ⊥ (null), otherwise {address}.

DataTypeSpec reference(const std::string& name, bool write_once, const CatalogParams& p) {
  DataTypeSpec spec;
  spec.name = name;
  spec.init_state = State{};
  spec.templates = {
      {"set", Role::Writer, unary(p.elements), arity1},
      {"get", Role::Reader, kNullary, arity0},
  };
  spec.transition = [write_once](const State& s, std::size_t t, const Args& a) -> Outcome {
    if (t == 0) {
      if (write_once && !s.cells.empty()) return fail(s);
      return {State{{a[0]}}, Response::none()};
    }
    return keep(s, s.cells.empty() ? Response::of(Datum::nil()) : Response::of_int(s.cells[0]));
  };
  spec.state_to_json = [](const State& s) {
    return s.cells.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.cells[0]);
  };
  spec.state_from_json = [](const nlohmann::json& j) {
    if (j.is_null()) return State{};
    if (!j.is_number_integer()) throw UsageError("reference state must be null or an integer");
    return State{{j.get<std::int64_t>()}};
  };
  return spec;
}

// --- map --------------------------------------------------------------------
// cells = sorted k0,v0,k1,v1,...

DataTypeSpec map_type(const std::string& name, bool returns, const CatalogParams& p) {
  DataTypeSpec spec;
  spec.name = name;
  spec.init_state = State{};
  spec.templates = {
      {"put", Role::Writer, binary(p.elements), arity2},
      {"remove", Role::Writer, unary(p.elements), arity1},
      {"contains", Role::Reader, unary(p.elements), arity1},
  };
  spec.transition = [returns](const State& s, std::size_t t, const Args& a) -> Outcome {
    const auto& c = s.cells;
    std::size_t i = 0;
    while (i < c.size() && c[i] < a[0]) i += 2;
    const bool present = i < c.size() && c[i] == a[0];
    const Response old = present ? Response::of_int(c[i + 1]) : Response::of(Datum::nil());
    switch (t) {
      case 0: {
        Cells next = c;
        if (present) {
          next[i + 1] = a[1];
        } else {
          next.insert(next.begin() + static_cast<std::ptrdiff_t>(i), {a[0], a[1]});
        }
        return {State{std::move(next)}, returns ? old : Response::none()};
      }
      case 1: {
        Cells next = c;
        if (present) next.erase(next.begin() + static_cast<std::ptrdiff_t>(i),
                                next.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        return {State{std::move(next)}, returns ? old : Response::none()};
      }
      default:
        return keep(s, Response::of_bool(present));
    }
  };
  spec.state_to_json = [](const State& s) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i + 1 < s.cells.size(); i += 2) {
      j[std::to_string(s.cells[i])] = s.cells[i + 1];
    }
    return j;
  };
  spec.state_from_json = [](const nlohmann::json& j) {
    if (!j.is_object()) throw UsageError("map state must be an object");
    std::vector<std::pair<std::int64_t, std::int64_t>> kv;
    for (const auto& [k, v] : j.items()) kv.emplace_back(std::stoll(k), v.get<std::int64_t>());
    std::sort(kv.begin(), kv.end());
    Cells c;
    for (auto [k, v] : kv) {
      c.push_back(k);
      c.push_back(v);
    }
    return State{std::move(c)};
  };
  return spec;
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"C1", "C2", "C3", "S1", "S2", "S3", "Q1", "R1", "R2", "M1", "M2"};
}

DataTypeSpec catalog(const std::string& name, const CatalogParams& params) {
  if (params.elements.empty()) throw UsageError("catalog domain must not be empty");
  if (name == "C1") return counter(name, Flavor::C1, params);
  if (name == "C2") return counter(name, Flavor::C2, params);
  if (name == "C3") return counter(name, Flavor::C3, params);
  if (name == "S1") return set_type(name, Flavor::C1, params);
  if (name == "S2") return set_type(name, Flavor::C2, params);
  if (name == "S3") return set_type(name, Flavor::C3, params);
  if (name == "Q1") return queue_type(params);
  if (name == "R1") return reference(name, false, params);
  if (name == "R2") return reference(name, true, params);
  if (name == "M1") return map_type(name, true, params);
  if (name == "M2") return map_type(name, false, params);
  throw UsageError("unknown catalog type '" + name + "' (expected one of C1 C2 C3 S1 S2 S3 Q1 R1 R2 M1 M2)");
}

}  // namespace adjusted
