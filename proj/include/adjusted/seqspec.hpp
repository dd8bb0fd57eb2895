#pragma once

// Executable sequential data types: states, operations, Hoare-style
// transitions where a failed precondition yields ⊥ and leaves the state alone.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace adjusted {

/// Raised on caller mistakes (unknown template, bad argument, bounds).
/// A ⊥ response is a legal outcome and never raises.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain value: nil, a boolean or an integer.
struct Datum {
  struct Nil {
    friend bool operator==(Nil, Nil) = default;
    friend auto operator<=>(Nil, Nil) = default;
  };
  std::variant<Nil, bool, std::int64_t> v;

  static Datum nil() { return {Nil{}}; }
  static Datum boolean(bool b) { return {b}; }
  static Datum integer(std::int64_t i) { return {i}; }

  friend bool operator==(const Datum&, const Datum&) = default;
  friend auto operator<=>(const Datum&, const Datum&) = default;
};

/// Response of an operation. Void (no return) and Bottom (⊥, failed
/// precondition) are distinct from every domain value.
struct Response {
  enum class Kind : std::uint8_t { Void, Bottom, Value };
  Kind kind = Kind::Void;
  Datum value{};

  static Response none() { return {Kind::Void, {}}; }
  static Response bottom() { return {Kind::Bottom, {}}; }
  static Response of(Datum d) { return {Kind::Value, d}; }
  static Response of_int(std::int64_t i) { return of(Datum::integer(i)); }
  static Response of_bool(bool b) { return of(Datum::boolean(b)); }

  bool is_bottom() const { return kind == Kind::Bottom; }
  bool is_void() const { return kind == Kind::Void; }

  friend bool operator==(const Response& a, const Response& b) {
    return a.kind == b.kind && (a.kind != Kind::Value || a.value == b.value);
  }
};

std::string to_string(const Response& r);
nlohmann::json to_json(const Response& r);
Response response_from_json(const nlohmann::json& j);

/// Canonical state encoding: a flat integer vector whose layout is owned by
/// the data type. Two states are equal iff their cells are equal.
struct State {
  std::vector<std::int64_t> cells;

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State&, const State&) = default;

  std::string encode() const;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept;
};

using Args = std::vector<std::int64_t>;

/// Role of an operation template in permission maps and analyses.
enum class Role : std::uint8_t {
  Reader,    // never changes the state
  Writer,    // mutates, response does not consume
  Consumer,  // mutating read (e.g. poll)
};

struct OpTemplate {
  std::string name;
  Role role = Role::Writer;
  /// Finite argument grid used by enumeration (exhaustive small domains).
  std::vector<Args> domain;
  /// Accepts any argument list the transition understands.
  std::function<bool(const Args&)> accepts;
};

/// A bag element. Equal template+args with different ids are distinct.
struct OpInstance {
  std::string name;
  Args args;
  int id = 0;

  std::string text() const;  // "set(1)", "get()"
  friend bool operator==(const OpInstance&, const OpInstance&) = default;
};

struct Outcome {
  State state;
  Response response;
};

class DataTypeSpec {
 public:
  using Transition = std::function<Outcome(const State&, std::size_t tmpl, const Args&)>;

  std::string name;
  State init_state;
  std::vector<OpTemplate> templates;
  Transition transition;
  std::function<nlohmann::json(const State&)> state_to_json;
  std::function<State(const nlohmann::json&)> state_from_json;

  std::optional<std::size_t> find(const std::string& tmpl) const;
  const OpTemplate& at(const std::string& tmpl) const;
  std::string render(const State& s) const { return state_to_json(s).dump(); }

  /// Readable in the sense used by the consensus bound: at least one reader.
  bool readable() const;
};

/// Applies one operation. Throws UsageError for unknown templates or
/// arguments outside the declared domain.
Outcome apply(const DataTypeSpec& spec, const State& state, const OpInstance& op);

struct SeqOutcome {
  State state;
  std::vector<Response> responses;
};

/// Left fold of apply.
SeqOutcome apply_seq(const DataTypeSpec& spec, const State& state,
                     const std::vector<OpInstance>& seq);

/// Every (template, args) pair of the spec's enumeration grid, ids 0..n-1.
std::vector<OpInstance> enumerate_items(const DataTypeSpec& spec);

/// Breadth-first reachable states from init, up to `depth` operations.
std::vector<State> reachable_states(const DataTypeSpec& spec, int depth = 3);

// ---------------------------------------------------------------------------
// Permission maps

enum class AccessClass : std::uint8_t { ALL, SWMR, MWSR, CWMR, CWSR };

std::string to_string(AccessClass c);
AccessClass access_class_from_string(const std::string& s);

struct PermissionMap {
  AccessClass access_class = AccessClass::ALL;
  std::map<int, std::set<std::string>> per_thread;
  std::optional<int> writer_thread;  // SWMR writer, MWSR/CWSR reader

  bool permits(int thread, const std::string& tmpl) const;

  static PermissionMap all(const DataTypeSpec& spec, int threads);
  static PermissionMap swmr(const DataTypeSpec& spec, int threads, int writer);
  static PermissionMap mwsr(const DataTypeSpec& spec, int threads, int reader);
  static PermissionMap cwmr(const DataTypeSpec& spec, int threads);
  static PermissionMap cwsr(const DataTypeSpec& spec, int threads, int reader);
};

/// Checks the structural invariants of a permission map against a spec.
/// Returns a description of the first violation, if any.
std::optional<std::string> validate(const PermissionMap& pmap, const DataTypeSpec& spec);

/// c and d strongly commute from s: both orders end in the same state and
/// each operation gets the same response in both orders.
bool strongly_commute(const DataTypeSpec& spec, const State& s, const OpInstance& c,
                      const OpInstance& d);

/// One operation per thread. For CWMR/CWSR the writer instances must pairwise
/// strongly commute from every state in `states` (default: BFS depth 3).
bool complies(const std::vector<std::pair<int, OpInstance>>& bag, const PermissionMap& pmap,
              const DataTypeSpec& spec, const std::vector<State>* states = nullptr);

// ---------------------------------------------------------------------------
// Catalog

struct CatalogParams {
  /// Element/key/value/address/argument domain used by enumeration grids.
  std::vector<std::int64_t> elements{1, 2};
};

std::vector<std::string> catalog_names();
DataTypeSpec catalog(const std::string& name, const CatalogParams& params = {});

// ---------------------------------------------------------------------------
// Adjustment check

struct Counterexample {
  State state;
  OpInstance op;
  Outcome expected;  // adjusted spec's outcome
  Outcome got;       // base spec's outcome
  std::string reason;
};

struct OpVerdict {
  std::string name;
  bool pre_implication = true;
  bool post_implication = true;
  std::size_t checked = 0;
  bool pass() const { return pre_implication && post_implication; }
};

struct AdjustReport {
  std::string adjusted;
  std::string base;
  bool narrowness = true;
  std::vector<std::string> missing_templates;
  std::vector<OpVerdict> verdicts;
  std::vector<Counterexample> counterexamples;
  bool pass = true;
};

/// Grid of argument tuples per template name; templates absent from the map
/// use the adjusted spec's enumeration domain.
using ArgGrid = std::map<std::string, std::vector<Args>>;

/// Extensional narrow-subtype check: base must be callable wherever the
/// adjusted precondition holds and must produce an output the adjusted
/// postcondition admits (equal state; equal response unless adjusted is Void).
AdjustReport check_adjusts(const DataTypeSpec& adjusted, const DataTypeSpec& base,
                           const std::vector<State>& state_sample, const ArgGrid& arg_sample = {});

/// O.m ⊆ O'.m, thread by thread.
bool permissions_included(const PermissionMap& adjusted, const PermissionMap& base);

nlohmann::json to_json(const AdjustReport& r, const DataTypeSpec& base);
nlohmann::json spec_to_json(const DataTypeSpec& spec);

}  // namespace adjusted
