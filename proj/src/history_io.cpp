#include <sstream>

#include "adjusted/linearizer.hpp"

namespace adjusted::lin {
namespace {

nlohmann::json event_json(const Event& e) {
  nlohmann::json j;
  j["ts"] = e.ts;
  j["thread"] = e.thread;
  j["kind"] = e.kind == EventKind::Invoke ? "invoke" : "respond";
  j["op"] = e.op.name;
  j["args"] = e.op.args;
  if (e.kind == EventKind::Respond) j["resp"] = to_json(e.resp);
  return j;
}

}  // namespace

std::string to_jsonl(const History& h) {
  std::string out;
  for (const auto& e : h.events) {
    out += event_json(e).dump();
    out += '\n';
  }
  return out;
}

History history_from_jsonl(const std::string& text) {
  History h;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Event e;
      e.ts = j.at("ts").get<std::uint64_t>();
      e.thread = j.at("thread").get<int>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "invoke") {
        e.kind = EventKind::Invoke;
      } else if (kind == "respond") {
        e.kind = EventKind::Respond;
        e.resp = response_from_json(j.at("resp"));
      } else {
        throw UsageError("kind must be invoke or respond");
      }
      e.op.name = j.at("op").get<std::string>();
      if (j.contains("args")) e.op.args = j.at("args").get<Args>();
      h.events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw UsageError("history line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const UsageError& ex) {
      throw UsageError("history line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return h;
}

nlohmann::json to_json(const CheckResult& r, const History& h) {
  nlohmann::json j;
  j["schema"] = "v1";
  j["linearizable"] = r.linearizable;
  j["explored"] = r.explored;
  const auto cs = calls(h);
  if (r.witness) {
    auto& order = j["witness"] = nlohmann::json::array();
    for (std::size_t p = 0; p < r.witness->order.size(); ++p) {
      const Call& c = cs[r.witness->order[p]];
      order.push_back({{"thread", c.thread},
                       {"op", c.op.text()},
                       {"resp", to_json(r.witness->responses[p])},
                       {"completed", c.respond.has_value()}});
    }
  }
  if (r.violating_prefix) {
    j["violating_prefix"] = *r.violating_prefix;
    auto& ev = j["prefix"] = nlohmann::json::array();
    for (std::size_t i = 0; i < *r.violating_prefix; ++i) ev.push_back(event_json(h.events[i]));
  }
  return j;
}

}  // namespace adjusted::lin
