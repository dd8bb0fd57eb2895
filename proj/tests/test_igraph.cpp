#include <doctest.h>

#include <fstream>
#include <sstream>

#include "adjusted/igraph.hpp"
#include "oracle.hpp"

using namespace adjusted;
using namespace adjusted::igraph;

namespace {

std::vector<OpInstance> bag_of(const std::string& text) { return parse_bag(text); }

oracle::EdgeMap edge_map(const IGraph& g) {
  oracle::EdgeMap out;
  auto letters = [&](Mask m) {
    std::string s;
    for (std::size_t i = 0; i < g.bag.size(); ++i)
      if (m & (Mask{1} << i)) s.push_back(static_cast<char>('a' + i));
    return s;
  };
  for (const auto& e : g.edges) {
    out[{g.node_name(e.u), g.node_name(e.v)}] = {letters(e.label.labels), letters(e.label.strong)};
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// x1..x6 in lexicographic order
const char* const kX[] = {"", "abc", "acb", "bac", "bca", "cab", "cba"};

IGraph counter_graph() {
  return build_graph(catalog("C2"), State{{0}}, bag_of("inc(1),inc(3),inc(5)"));
}

IGraph reference_graph() {
  auto r1 = catalog("R1");
  return build_graph(r1, r1.init_state, bag_of("set(1),set(2),get()"));
}

}  // namespace

TEST_CASE("counter panel: exactly six strong edges") {
  auto g = counter_graph();
  CHECK(g.nodes.size() == 6);
  oracle::EdgeMap expected{
      {{kX[1], kX[2]}, {"a", "a"}}, {{kX[1], kX[3]}, {"c", "c"}}, {{kX[2], kX[5]}, {"b", "b"}},
      {{kX[3], kX[4]}, {"b", "b"}}, {{kX[4], kX[6]}, {"a", "a"}}, {{kX[5], kX[6]}, {"c", "c"}},
  };
  CHECK(edge_map(g) == expected);
  CHECK(classes(g).size() == 1);
}

TEST_CASE("reference panel: complete graph, get labels three edges") {
  auto g = reference_graph();
  auto edges = edge_map(g);
  CHECK(edges.size() == 15);
  for (const auto& [uv, lab] : edges) {
    CHECK(lab.first.find('a') != std::string::npos);
    CHECK(lab.first.find('b') != std::string::npos);
    const bool c = lab.first.find('c') != std::string::npos;
    const bool expected = uv == std::pair<std::string, std::string>{kX[1], kX[4]} ||
                          uv == std::pair<std::string, std::string>{kX[2], kX[3]} ||
                          uv == std::pair<std::string, std::string>{kX[5], kX[6]};
    CHECK(c == expected);
  }
  CHECK(is_labeling(g, 0));
  CHECK(is_labeling(g, 1));
  CHECK_FALSE(is_labeling(g, 2));
}

TEST_CASE("graph goldens are byte-stable") {
  auto c2 = catalog("C2");
  auto r1 = catalog("R1");
  const std::string dir = ADJUSTED_GOLDEN_DIR;
  CHECK(export_graph(counter_graph(), c2, Format::Dot) == read_file(dir + "/counter.dot"));
  CHECK(export_graph(counter_graph(), c2, Format::Json) == read_file(dir + "/counter.json"));
  CHECK(export_graph(reference_graph(), r1, Format::Dot) == read_file(dir + "/reference.dot"));
  CHECK(export_graph(reference_graph(), r1, Format::Json) == read_file(dir + "/reference.json"));
}

TEST_CASE("export details") {
  auto r1 = catalog("R1");
  auto g = reference_graph();
  auto dot = export_graph(g, r1, Format::Dot);
  std::size_t arrows = 0;
  for (std::size_t p = dot.find(" -- "); p != std::string::npos; p = dot.find(" -- ", p + 1)) ++arrows;
  CHECK(arrows == 15);
  CHECK(dot.find("strong=\"\"") != std::string::npos);

  auto back = graph_from_json(graph_to_json(g, r1), r1);
  CHECK(back.nodes == g.nodes);
  CHECK(back.edges == g.edges);
  CHECK(back.bag == g.bag);
  CHECK(back.start == g.start);
}

TEST_CASE("indist examples") {
  auto c2 = catalog("C2");
  auto bag = bag_of("inc(1),inc(3),inc(5)");
  const State s{{0}};
  auto r = indist(c2, s, bag, {0, 1, 2}, {0, 2, 1}, 0);
  CHECK(r.indist);
  CHECK(r.strong);
  r = indist(c2, s, bag, {0, 1, 2}, {1, 0, 2}, 2);
  CHECK(r.indist);
  CHECK(r.strong);
  r = indist(c2, s, bag, {0, 1, 2}, {1, 0, 2}, 0);
  CHECK_FALSE(r.indist);
  CHECK_FALSE(r.strong);
  for (int op = 0; op < 3; ++op) {
    r = indist(c2, s, bag, {2, 0, 1}, {2, 0, 1}, op);
    CHECK(r.indist);
    CHECK(r.strong);
  }
}

TEST_CASE("S1 add/add/contains agrees with the oracle") {
  auto s1 = catalog("S1");
  auto bag = bag_of("add(1),add(1),contains(1)");
  auto g = build_graph(s1, s1.init_state, bag);
  CHECK(edge_map(g) == oracle::edges(s1, s1.init_state, bag));
}

TEST_CASE("classes") {
  auto c2 = catalog("C2");
  CHECK(classes(build_graph(c2, State{{0}}, bag_of("inc,inc"))).size() == 2);
  CHECK(classes(build_graph(c2, State{{0}}, bag_of("inc"))).size() == 1);
  CHECK(classes(counter_graph()).size() == 1);
}

TEST_CASE("labeling") {
  auto s2 = catalog("S2");
  CHECK(bag_labeling(build_graph(s2, s2.init_state, bag_of("add(1),add(2)"))));
  auto c2 = catalog("C2");
  CHECK_FALSE(bag_labeling(build_graph(c2, State{{0}}, bag_of("inc,inc"))));
}

TEST_CASE("build_graph enforces the factorial bound") {
  auto c2 = catalog("C2");
  CHECK_THROWS_AS(build_graph(c2, State{{0}}, bag_of("inc,inc,inc,inc,inc,inc,inc")), UsageError);
  CHECK_THROWS_AS(build_graph(c2, State{{0}}, bag_of("inc,inc,inc"), IndistMode::LongLived, 2),
                  UsageError);
}

TEST_CASE("parse_bag") {
  auto b = parse_bag(" set(1), set( 2 ) ,get()");
  REQUIRE(b.size() == 3);
  CHECK(b[1].text() == "set(2)");
  CHECK(b[2].id == 2);
  CHECK(parse_bag("inc,inc").size() == 2);
  CHECK_THROWS_AS(parse_bag("set(1"), UsageError);
  CHECK_THROWS_AS(parse_bag(""), UsageError);
  CHECK_THROWS_AS(parse_bag("set(x)"), UsageError);
}

TEST_CASE("movers") {
  SUBCASE("blind add left-moves over add-only bags") {
    auto s2 = catalog("S2");
    std::vector<std::vector<OpInstance>> bags;
    for (auto& b : enumerate_bags(s2, 3, 1000)) {
      if (std::all_of(b.begin(), b.end(), [](const OpInstance& o) { return o.name == "add"; }))
        bags.push_back(b);
    }
    REQUIRE_FALSE(bags.empty());
    auto v = is_left_mover(s2, "add", reachable_states(s2, 3), bags);
    CHECK(v.holds);
    CHECK(v.checked > 0);
    CHECK(left_moves(s2, s2.init_state, bag_of("add(1),add(2)"), {0, 1}, 1));
  }
  SUBCASE("offer left-moves across poll on non-empty queues") {
    auto q1 = catalog("Q1");
    std::vector<State> nonempty;
    for (auto& s : reachable_states(q1, 3))
      if (!s.cells.empty()) nonempty.push_back(s);
    auto bags = std::vector<std::vector<OpInstance>>{bag_of("poll,offer(1)"), bag_of("poll,offer(2)")};
    CHECK(is_left_mover(q1, "offer", nonempty, bags).holds);
    CHECK_FALSE(is_left_mover(q1, "offer", {q1.init_state}, bags).holds);
  }
  SUBCASE("returning inc is neither mover") {
    auto c2 = catalog("C2");
    std::vector<std::vector<OpInstance>> bags{bag_of("inc,inc")};
    auto left = is_left_mover(c2, "inc", {State{{0}}}, bags);
    CHECK_FALSE(left.holds);
    REQUIRE(left.counterexample.has_value());
    CHECK_FALSE(is_right_mover(c2, "inc", {State{{0}}}, bags).holds);
  }
  SUBCASE("reads right-move in R1 bags") {
    auto r1 = catalog("R1");
    auto v = is_right_mover(r1, "get", reachable_states(r1, 3), enumerate_bags(r1, 3, 1000));
    CHECK(v.holds);
  }
}

TEST_CASE("mover duality and oracle agreement on exhaustive small bags") {
  for (const auto& name : catalog_names()) {
    auto spec = catalog(name);
    for (const auto& s : reachable_states(spec, 2)) {
      for (const auto& bag : enumerate_bags(spec, 3, 1000)) {
        for (const auto& x : oracle::permutations(3)) {
          for (std::size_t i = 1; i < 3; ++i) {
            const bool r = right_moves(spec, s, bag, x, i);
            CHECK(r == left_moves(spec, s, bag, swap_adjacent(x, i), i));
            CHECK(r == oracle::moves(spec, s, bag, x, i, false));
            CHECK(left_moves(spec, s, bag, x, i) == oracle::moves(spec, s, bag, x, i, true));
          }
        }
      }
    }
  }
}

TEST_CASE("class bound and first-element rule") {
  for (const auto& name : catalog_names()) {
    auto spec = catalog(name);
    for (const auto& s : reachable_states(spec, 2)) {
      for (std::size_t k = 1; k <= 3; ++k) {
        for (const auto& bag : enumerate_bags(spec, k, 1000)) {
          auto g = build_graph(spec, s, bag);
          auto cls = classes(g);
          CHECK(cls.size() <= bag.size());
          std::vector<int> cls_of(g.nodes.size());
          for (std::size_t c = 0; c < cls.size(); ++c)
            for (int n : cls[c]) cls_of[static_cast<std::size_t>(n)] = static_cast<int>(c);
          for (std::size_t u = 0; u < g.nodes.size(); ++u)
            for (std::size_t v = 0; v < g.nodes.size(); ++v)
              if (g.nodes[u][0] == g.nodes[v][0]) CHECK(cls_of[u] == cls_of[v]);
          for (const auto& e : g.edges) {
            CHECK(e.label.labels != 0);
            CHECK((e.label.strong & ~e.label.labels) == 0);
          }
        }
      }
    }
  }
}

TEST_CASE("dist and consensus facts") {
  auto c2 = catalog("C2");
  auto states = reachable_states(c2, 3);
  auto bags = default_bags(c2, 200);
  CHECK(dist_classify(c2, 1, states, bags).l == 1);
  auto d2 = dist_classify(c2, 2, states, bags);
  CHECK(d2.l == 2);
  CHECK(d2.witness_state.has_value());
  CHECK(dist_classify(c2, 3, states, bags).l == 1);
  // distinct increments
  CHECK(classes(counter_graph()).size() == 1);

  CHECK(consensus_bound(c2, 4, states, bags).value == 2);
  auto s2 = catalog("S2");
  CHECK(consensus_bound(s2, 4, reachable_states(s2, 3), default_bags(s2, 200)).value == 1);
  auto r1 = catalog("R1");
  CHECK(consensus_bound(r1, 4, reachable_states(r1, 3), default_bags(r1, 200)).value == 1);

  auto unreadable = c2;
  for (auto& t : unreadable.templates) t.role = Role::Writer;
  CHECK_THROWS_AS(consensus_bound(unreadable, 4, states, bags), UsageError);
  CHECK_THROWS_AS(consensus_bound(c2, 1, states, bags), UsageError);
}

TEST_CASE("serial and parallel sweeps agree") {
  for (const char* name : {"C2", "S1", "Q1", "M1"}) {
    auto spec = catalog(name);
    auto states = reachable_states(spec, 3);
    GeneratorBounds serial, parallel;
    serial.exec = Execution::Serial;
    parallel.exec = Execution::Parallel;
    for (std::size_t k = 1; k <= 3; ++k) {
      auto a = dist_classify(spec, k, states, default_bags(spec, 200), serial);
      auto b = dist_classify(spec, k, states, default_bags(spec, 200), parallel);
      CHECK(a.l == b.l);
      CHECK(a.graphs == b.graphs);
      CHECK(a.witness_bag == b.witness_bag);
    }
    auto bags = enumerate_bags(spec, 3, 200);
    for (const auto& t : spec.templates) {
      auto a = is_left_mover(spec, t.name, states, bags, Execution::Serial);
      auto b = is_left_mover(spec, t.name, states, bags, Execution::Parallel);
      CHECK(a.holds == b.holds);
      CHECK(a.checked == b.checked);
    }
  }
}

TEST_CASE("pair classification and permissiveness") {
  auto r1 = catalog("R1");
  auto rs = reachable_states(r1, 3);
  CHECK(classify_pair(r1, bag_of("set(1)")[0], bag_of("set(2)")[0], rs) == PairClass::Overwriting);
  CHECK(is_permissive(r1, rs).permissive);

  auto c2 = catalog("C2");
  auto cs = reachable_states(c2, 3);
  CHECK(classify_pair(c2, bag_of("inc")[0], bag_of("inc")[0], cs) == PairClass::Neither);
  auto rep = is_permissive(c2, cs);
  CHECK_FALSE(rep.permissive);
  CHECK(rep.offending.has_value());

  auto s2 = catalog("S2");
  CHECK(is_permissive(s2, reachable_states(s2, 3)).permissive);
  auto c3 = catalog("C3");
  CHECK(classify_pair(c3, bag_of("inc")[0], bag_of("inc")[0], reachable_states(c3, 3)) ==
        PairClass::WeaklyCommuting);
}

TEST_CASE("adjustment adds edges along return-erasing arrows") {
  const std::vector<std::pair<std::string, std::string>> arrows{{"S1", "S2"}, {"C2", "C3"}, {"M1", "M2"}};
  for (const auto& [b, a] : arrows) {
    auto base = catalog(b), adj = catalog(a);
    for (const auto& s : reachable_states(base, 2)) {
      for (std::size_t k = 2; k <= 3; ++k) {
        for (const auto& bag : enumerate_bags(base, k, 1000)) {
          CHECK(graph_included(build_graph(base, s, bag), build_graph(adj, s, bag)));
        }
      }
    }
  }
}

TEST_CASE("precondition strengthening can remove edges") {
  // R2's second set fails (⊥) where R1's returns Void, so the two orders
  // stop agreeing on set's response.
  auto r1 = catalog("R1"), r2 = catalog("R2");
  auto bag = bag_of("set(1),set(2)");
  auto g1 = build_graph(r1, r1.init_state, bag);
  auto g2 = build_graph(r2, r2.init_state, bag);
  CHECK(g1.edges.size() == 1);
  CHECK(g2.edges.empty());
  CHECK_FALSE(graph_included(g1, g2));
}

TEST_CASE("writers that commute label every graph; returning incs do not") {
  auto s3 = catalog("S3");
  for (const auto& s : reachable_states(s3, 3)) {
    for (std::size_t k = 2; k <= 3; ++k) {
      for (const auto& bag : enumerate_bags(s3, k, 1000)) {
        if (std::any_of(bag.begin(), bag.end(), [](const OpInstance& o) { return o.name == "contains"; }))
          continue;
        CHECK(bag_labeling(build_graph(s3, s, bag)));
      }
    }
  }
  auto c2 = catalog("C2");
  CHECK_FALSE(bag_labeling(build_graph(c2, State{{0}}, bag_of("inc,inc"))));
}

TEST_CASE("edges equal the direct-definition oracle for every catalog type") {
  for (const auto& name : catalog_names()) {
    auto spec = catalog(name);
    for (const auto& s : reachable_states(spec, 3)) {
      for (std::size_t k = 1; k <= 3; ++k) {
        for (const auto& bag : enumerate_bags(spec, k, 1000)) {
          CHECK(edge_map(build_graph(spec, s, bag)) == oracle::edges(spec, s, bag));
        }
      }
    }
  }
}
