#include <cctype>
#include <sstream>

#include "adjusted/igraph.hpp"

namespace adjusted::igraph {
namespace {

std::string mask_names(Mask m, std::size_t n, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(m & (Mask{1} << i))) continue;
    if (!out.empty()) out += sep;
    out.push_back(static_cast<char>('a' + i));
  }
  return out;
}

nlohmann::json mask_json(Mask m, std::size_t n) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (m & (Mask{1} << i)) arr.push_back(std::string(1, static_cast<char>('a' + i)));
  }
  return arr;
}

Mask mask_from_json(const nlohmann::json& arr) {
  Mask m = 0;
  for (const auto& v : arr) m |= Mask{1} << (v.get<std::string>().at(0) - 'a');
  return m;
}

const char* mode_name(IndistMode m) {
  switch (m) {
    case IndistMode::LongLived:
      return "long-lived";
    case IndistMode::ImmediateState:
      return "immediate";
    case IndistMode::OneShot:
      return "one-shot";
  }
  return "?";
}

IndistMode mode_from(const std::string& s) {
  if (s == "long-lived") return IndistMode::LongLived;
  if (s == "immediate") return IndistMode::ImmediateState;
  if (s == "one-shot") return IndistMode::OneShot;
  throw UsageError("unknown indistinguishability mode: " + s);
}

}  // namespace

nlohmann::json graph_to_json(const IGraph& g, const DataTypeSpec& spec) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["spec"] = g.spec_name;
  j["mode"] = mode_name(g.mode);
  j["start"] = spec.state_to_json(g.start);
  auto& bag = j["bag"] = nlohmann::json::array();
  for (std::size_t i = 0; i < g.bag.size(); ++i) {
    bag.push_back({{"name", std::string(1, static_cast<char>('a' + i))},
                   {"op", g.bag[i].name},
                   {"args", g.bag[i].args},
                   {"id", g.bag[i].id}});
  }
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) nodes.push_back(g.node_name(n));
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"u", g.node_name(e.u)},
                     {"v", g.node_name(e.v)},
                     {"labels", mask_json(e.label.labels, g.bag.size())},
                     {"strong", mask_json(e.label.strong, g.bag.size())}});
  }
  auto& cls = j["classes"] = nlohmann::json::array();
  for (const auto& c : classes(g)) {
    auto members = nlohmann::json::array();
    for (int n : c) members.push_back(g.node_name(n));
    cls.push_back(std::move(members));
  }
  return j;
}

IGraph graph_from_json(const nlohmann::json& j, const DataTypeSpec& spec) {
  IGraph g;
  g.spec_name = j.at("spec").get<std::string>();
  g.mode = mode_from(j.at("mode").get<std::string>());
  g.start = spec.state_from_json(j.at("start"));
  for (const auto& b : j.at("bag")) {
    g.bag.push_back({b.at("op").get<std::string>(), b.at("args").get<Args>(), b.at("id").get<int>()});
  }
  std::map<std::string, int> index;
  for (const auto& name : j.at("nodes")) {
    Perm p;
    for (char c : name.get<std::string>()) p.push_back(c - 'a');
    index[name.get<std::string>()] = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(p));
  }
  for (const auto& e : j.at("edges")) {
    int u = index.at(e.at("u").get<std::string>());
    int v = index.at(e.at("v").get<std::string>());
    if (u > v) std::swap(u, v);
    g.edges.push_back({u, v, {mask_from_json(e.at("labels")), mask_from_json(e.at("strong"))}});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair{a.u, a.v} < std::pair{b.u, b.v}; });
  return g;
}

std::string export_graph(const IGraph& g, const DataTypeSpec& spec, Format format) {
  if (format == Format::Json) return graph_to_json(g, spec).dump(2) + "\n";
  std::ostringstream out;
  out << "graph \"" << g.spec_name << "\" {\n";
  out << "  start=\"" << spec.render(g.start) << "\";\n";
  out << "  mode=\"" << mode_name(g.mode) << "\";\n";
  for (std::size_t i = 0; i < g.bag.size(); ++i) {
    out << "  // " << static_cast<char>('a' + i) << " = " << g.bag[i].text() << "\n";
  }
  for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) {
    out << "  \"" << g.node_name(n) << "\";\n";
  }
  for (const auto& e : g.edges) {
    out << "  \"" << g.node_name(e.u) << "\" -- \"" << g.node_name(e.v) << "\" [label=\""
        << mask_names(e.label.labels, g.bag.size(), ",") << "\", strong=\""
        << mask_names(e.label.strong, g.bag.size(), ",") << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::vector<OpInstance> parse_bag(const std::string& text) {
  std::vector<OpInstance> bag;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  while (true) {
    skip_ws();
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
    if (i == start) throw UsageError("malformed bag near '" + text.substr(start) + "'");
    OpInstance op{text.substr(start, i - start), {}, static_cast<int>(bag.size())};
    skip_ws();
    if (i < text.size() && text[i] == '(') {
      ++i;
      while (true) {
        skip_ws();
        if (i < text.size() && text[i] == ')') {
          ++i;
          break;
        }
        std::size_t used = 0;
        try {
          op.args.push_back(std::stoll(text.substr(i), &used));
        } catch (const std::exception&) {
          throw UsageError("bad argument in bag near '" + text.substr(i) + "'");
        }
        i += used;
        skip_ws();
        if (i < text.size() && text[i] == ',') {
          ++i;
        } else if (i >= text.size() || text[i] != ')') {
          throw UsageError("expected ')' in bag item " + op.name);
        }
      }
    }
    bag.push_back(std::move(op));
    skip_ws();
    if (i < text.size()) {
      if (text[i] != ',') throw UsageError("expected ',' between bag items");
      ++i;
    }
  }
  if (bag.empty()) throw UsageError("empty bag");
  return bag;
}

}  // namespace adjusted::igraph
