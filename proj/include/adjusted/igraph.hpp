#pragma once

// Indistinguishability graphs over permutations of an operation bag, and the
// scalability predicates computed from them.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adjusted/seqspec.hpp"

namespace adjusted::igraph {

using Perm = std::vector<int>;  // indices into the bag
using Mask = std::uint64_t;     // bit i = bag element i

inline constexpr std::size_t kDefaultFactorialBound = 6;

enum class IndistMode : std::uint8_t {
  /// Same response and a common state reached at or after the operation.
  LongLived,
  /// Same response and the same state right after the operation.
  ImmediateState,
  /// Responses only (one-shot objects).
  OneShot,
};

enum class Execution : std::uint8_t { Serial, Parallel };

struct EdgeLabel {
  Mask labels = 0;
  Mask strong = 0;
  friend bool operator==(const EdgeLabel&, const EdgeLabel&) = default;
};

struct Edge {
  int u = 0;  // node index, u < v
  int v = 0;
  EdgeLabel label;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct IGraph {
  std::string spec_name;
  State start;
  std::vector<OpInstance> bag;
  std::vector<Perm> nodes;   // lexicographic order of index permutations
  std::vector<Edge> edges;   // sorted by (u, v), only non-empty labels
  IndistMode mode = IndistMode::LongLived;

  std::optional<EdgeLabel> label(int u, int v) const;
  std::string node_name(int n) const;  // "abc"
  std::size_t pair_count() const { return nodes.size() * (nodes.size() - 1) / 2; }
};

/// Per-position responses and states of one permutation.
struct Trace {
  std::vector<Response> responses;  // by position
  std::vector<State> after;         // state after each position
};

Trace trace(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
            const Perm& x);

struct Indist {
  bool indist = false;
  bool strong = false;
};

/// x ≍ y for bag element `op` from `start`.
Indist indist(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
              const Perm& x, const Perm& y, int op, IndistMode mode = IndistMode::LongLived);

IGraph build_graph(const DataTypeSpec& spec, const State& start, std::vector<OpInstance> bag,
                   IndistMode mode = IndistMode::LongLived,
                   std::size_t factorial_bound = kDefaultFactorialBound);

/// Connected components of the any-label edge relation, each sorted, ordered
/// by smallest member.
std::vector<std::vector<int>> classes(const IGraph& g);

bool is_labeling(const IGraph& g, int op);
bool is_strongly_labeling(const IGraph& g, int op);
bool bag_labeling(const IGraph& g);
bool bag_strongly_labeling(const IGraph& g);

/// x[i] strongly labels the edge to x with positions i-1, i swapped.
bool left_moves(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
                const Perm& x, std::size_t i, IndistMode mode = IndistMode::LongLived);
/// x[i-1] strongly labels the edge to x with positions i-1, i swapped.
bool right_moves(const DataTypeSpec& spec, const State& start, const std::vector<OpInstance>& bag,
                 const Perm& x, std::size_t i, IndistMode mode = IndistMode::LongLived);

Perm swap_adjacent(Perm x, std::size_t i);

struct MoverWitness {
  State start;
  std::vector<OpInstance> bag;
  Perm perm;
  std::size_t position = 0;
};

struct MoverVerdict {
  bool holds = true;
  std::size_t checked = 0;
  std::optional<MoverWitness> counterexample;
};

/// Quantifies left_moves / right_moves over every (state, bag, permutation,
/// position) where an instance of template `tmpl` sits at a position >= 1.
MoverVerdict is_left_mover(const DataTypeSpec& spec, const std::string& tmpl,
                           const std::vector<State>& states,
                           const std::vector<std::vector<OpInstance>>& bags,
                           Execution exec = Execution::Serial);
MoverVerdict is_right_mover(const DataTypeSpec& spec, const std::string& tmpl,
                            const std::vector<State>& states,
                            const std::vector<std::vector<OpInstance>>& bags,
                            Execution exec = Execution::Serial);

// ---------------------------------------------------------------------------
// Generators and dist(k, l)

struct GeneratorBounds {
  int state_depth = 3;
  std::size_t max_bags = 200;
  std::size_t factorial_bound = kDefaultFactorialBound;
  IndistMode mode = IndistMode::LongLived;
  Execution exec = Execution::Parallel;
};

/// All multisets of size k over the spec's enumeration items, in
/// lexicographic order of item index, capped at `cap`. Instance ids 0..k-1.
std::vector<std::vector<OpInstance>> enumerate_bags(const DataTypeSpec& spec, std::size_t k,
                                                    std::size_t cap);

using BagGenerator = std::function<std::vector<std::vector<OpInstance>>(std::size_t k)>;

BagGenerator default_bags(const DataTypeSpec& spec, std::size_t cap);

struct DistResult {
  std::size_t k = 0;
  std::size_t l = 0;
  std::size_t graphs = 0;
  std::optional<State> witness_state;
  std::vector<OpInstance> witness_bag;
};

DistResult dist_classify(const DataTypeSpec& spec, std::size_t k, const std::vector<State>& states,
                         const BagGenerator& bags, const GeneratorBounds& bounds = {});

struct ConsensusEstimate {
  std::size_t value = 1;
  std::vector<DistResult> per_k;  // k = 1..kmax
  GeneratorBounds bounds;
  std::size_t state_count = 0;
};

/// max { k <= kmax : l >= 2 } ∪ {1}. Requires a readable spec.
ConsensusEstimate consensus_bound(const DataTypeSpec& spec, std::size_t kmax,
                                  const std::vector<State>& states, const BagGenerator& bags,
                                  const GeneratorBounds& bounds = {});

// ---------------------------------------------------------------------------
// Permissiveness

enum class PairClass : std::uint8_t { Overwriting, WeaklyCommuting, Neither };

std::string to_string(PairClass c);

PairClass classify_pair(const DataTypeSpec& spec, const OpInstance& c, const OpInstance& d,
                        const std::vector<State>& states);

struct PermissiveReport {
  bool permissive = true;
  std::optional<std::pair<OpInstance, OpInstance>> offending;
};

/// Every pair of write instances (from the enumeration grid, including a
/// write paired with itself) is overwriting or weakly commuting.
PermissiveReport is_permissive(const DataTypeSpec& spec, const std::vector<State>& states);

// ---------------------------------------------------------------------------
// Export

enum class Format : std::uint8_t { Dot, Json };

std::string export_graph(const IGraph& g, const DataTypeSpec& spec, Format format);
nlohmann::json graph_to_json(const IGraph& g, const DataTypeSpec& spec);
IGraph graph_from_json(const nlohmann::json& j, const DataTypeSpec& spec);

/// base ⊆ adjusted: every base edge exists in adjusted with a superset label.
bool graph_included(const IGraph& base, const IGraph& adjusted);

/// Parses "set(1),set(2),get()" or "inc,inc"; ids assigned left to right.
std::vector<OpInstance> parse_bag(const std::string& text);

}  // namespace adjusted::igraph
