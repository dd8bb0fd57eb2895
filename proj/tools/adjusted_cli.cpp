// Command-line front end: analyze, adjusts-check, lincheck, bench-micro,
// bench-retwis. Exit codes: 0 success, 1 gated negative result, 2 usage error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "adjusted/bench/micro.hpp"
#include "adjusted/bench/retwis.hpp"
#include "adjusted/igraph.hpp"
#include "adjusted/linearizer.hpp"
#include "adjusted/seqspec.hpp"

using namespace adjusted;

namespace {

std::vector<std::int64_t> parse_elements(const std::string& text) {
  std::vector<std::int64_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw UsageError("element '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw UsageError("element domain is empty");
  return out;
}

State parse_state(const DataTypeSpec& spec, const std::string& text) {
  if (text.empty()) return spec.init_state;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw UsageError("state '" + text + "' is not JSON");
  }
  return spec.state_from_json(j);
}

igraph::IndistMode parse_mode(const std::string& m) {
  if (m == "long-lived") return igraph::IndistMode::LongLived;
  if (m == "immediate") return igraph::IndistMode::ImmediateState;
  if (m == "one-shot") return igraph::IndistMode::OneShot;
  throw UsageError("unknown mode '" + m + "'");
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw UsageError("cannot write " + path);
    }
  }
  std::ostream& operator()() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void warn_threads(int threads) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0 && static_cast<unsigned>(threads) > hw) {
    std::cerr << "warning: " << threads << " threads on " << hw << " hardware threads\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjusted objects: analysis, linearizability checking and benchmarks"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);
  std::string output;
  app.add_option("-o,--output", output, "Write results to this file instead of stdout");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Indistinguishability graph of a bag, or scalability facts");
  std::string a_spec, a_bag, a_state, a_mode = "long-lived", a_format = "json", a_elements = "1,2";
  std::size_t a_bound = igraph::kDefaultFactorialBound, a_kmax = 4, a_max_bags = 200;
  int a_depth = 3;
  bool a_facts = false;
  analyze->add_option("--spec", a_spec, "Catalog spec (R1 R2 S1 S2 S3 C1 C2 C3 Q1 M1 M2)")->required();
  analyze->add_option("--bag", a_bag, "Bag such as set(1),set(2),get(); ids left to right");
  analyze->add_option("--state", a_state, "Start state as JSON; default is the spec's initial state");
  analyze->add_option("--mode", a_mode, "Indistinguishability reading: long-lived, immediate, one-shot");
  analyze->add_option("--format", a_format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
  analyze->add_option("--factorial-bound", a_bound, "Largest bag size (bag size n builds n! nodes)");
  analyze->add_flag("--facts", a_facts, "Report consensus bound, dist levels and permissiveness instead of a graph");
  analyze->add_option("--kmax", a_kmax, "Largest k explored by --facts");
  analyze->add_option("--depth", a_depth, "BFS depth of start states explored by --facts");
  analyze->add_option("--max-bags", a_max_bags, "Bags per size explored by --facts");
  analyze->add_option("--elements", a_elements, "Argument domain of the catalog spec");

  // adjusts-check
  auto* adjusts = app.add_subcommand("adjusts-check", "Check that one spec adjusts (narrows) another");
  std::string j_adjusted, j_base, j_elements = "1,2";
  int j_depth = 3;
  bool j_expect = true;
  adjusts->add_option("--adjusted", j_adjusted, "Adjusted catalog spec")->required();
  adjusts->add_option("--base", j_base, "Base catalog spec")->required();
  adjusts->add_option("--depth", j_depth, "BFS depth of the sampled states");
  adjusts->add_option("--elements", j_elements, "Argument domain of both specs");
  adjusts->add_flag("--expect-pass,!--no-expect-pass", j_expect, "Exit 1 when the check fails");

  // lincheck
  auto* lincheck = app.add_subcommand("lincheck", "Check a recorded history for linearizability");
  std::string l_history, l_spec, l_state;
  std::size_t l_max = lin::CheckOptions{}.max_completed;
  bool l_expect = true;
  lincheck->add_option("--history", l_history, "JSONL history file, - for stdin")->required();
  lincheck->add_option("--spec", l_spec, "Catalog spec of the object")->required();
  lincheck->add_option("--state", l_state, "Initial state as JSON; default is the spec's initial state");
  lincheck->add_option("--max-completed", l_max, "Bound on completed calls");
  lincheck->add_flag("--expect-linearizable,!--no-expect-linearizable", l_expect,
                     "Exit 1 when the history is not linearizable");

  // bench-micro
  auto* micro = app.add_subcommand("bench-micro", "Micro-benchmark of one object");
  bench::MicroConfig m;
  std::string m_out = "csv";
  std::uint64_t m_max_ops = 0;
  bool m_full = false, m_compare = false;
  micro->add_option("--object", m.object, "Object id, e.g. counter.adjusted or hashmap.baseline");
  micro->add_option("-u,--update", m.update_ratio, "Update percentage");
  micro->add_option("-i,--initial", m.initial_size, "Initial size");
  micro->add_option("-r,--range", m.key_range, "Key range");
  micro->add_option("-d,--duration", m.duration, "Measured seconds per run");
  micro->add_option("-W,--warmup", m.warmup, "Warmup seconds per run");
  micro->add_option("-n,--runs", m.runs, "Runs");
  micro->add_option("-t,--threads", m.threads, "Worker threads");
  micro->add_option("-b,--batch", m.batch, "Operations per measurement");
  micro->add_option("--seed", m.seed, "Random seed");
  micro->add_option("--max-ops", m_max_ops, "Fixed operations per thread and run, no timer (0 = timed)");
  micro->add_flag("!--no-routing", m.route_keys, "Let map updates pick any key instead of thread-owned keys");
  micro->add_flag("--full-scale", m_full, "60 s runs after 30 s warmup, 30 runs");
  micro->add_flag("--compare", m_compare, "Also run the baseline and report the throughput ratio");
  micro->add_option("--out", m_out, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  // bench-retwis
  auto* retwis = app.add_subcommand("bench-retwis", "Social network benchmark");
  bench::RetwisConfig r;
  std::string r_out = "csv", r_mix = "5,5,15,60,5,10";
  std::uint64_t r_max_ops = 0;
  bool r_full = false, r_expect = true;
  retwis->add_option("--users", r.users, "Initial users");
  retwis->add_option("--alpha", r.alpha, "Skew in (0,1]; 1 is biased, near 0 uniform");
  retwis->add_option("--variant", r.variant, "baseline, adjusted or dap")
      ->check(CLI::IsMember({"baseline", "adjusted", "dap"}));
  retwis->add_option("-t,--threads", r.threads, "Worker threads");
  retwis->add_option("--mix", r_mix, "Percentages: add user, follow/unfollow, post, timeline, group, profile");
  retwis->add_option("--seed", r.seed, "Random seed");
  retwis->add_option("-d,--duration", r.duration, "Measured seconds per run");
  retwis->add_option("-W,--warmup", r.warmup, "Warmup seconds per run");
  retwis->add_option("-n,--runs", r.runs, "Runs");
  retwis->add_option("--timeline-cap", r.timeline_cap, "Messages returned by a timeline fetch");
  retwis->add_option("--fanout", r.eager_fanout, "Followers receiving a post synchronously");
  retwis->add_option("--degree", r.avg_degree, "Average follows per user in the generated graph");
  retwis->add_option("--max-ops", r_max_ops, "Fixed operations per thread and run, no timer (0 = timed)");
  retwis->add_flag("--full-scale", r_full, "20 s runs after 5 s warmup, 10 runs");
  retwis->add_flag("--expect-invariants,!--no-expect-invariants", r_expect,
                   "Exit 1 when a structural invariant fails");
  retwis->add_option("--out", r_out, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Output out(output);
    if (*analyze) {
      CatalogParams params{parse_elements(a_elements)};
      const auto spec = catalog(a_spec, params);
      const auto mode = parse_mode(a_mode);
      if (a_facts) {
        igraph::GeneratorBounds bounds;
        bounds.state_depth = a_depth;
        bounds.max_bags = a_max_bags;
        bounds.factorial_bound = a_bound;
        bounds.mode = mode;
        const auto states = reachable_states(spec, a_depth);
        const auto bags = igraph::default_bags(spec, a_max_bags);
        nlohmann::json j;
        j["schema"] = "v1";
        j["spec"] = spec.name;
        j["readable"] = spec.readable();
        if (spec.readable()) {
          const auto c = igraph::consensus_bound(spec, a_kmax, states, bags, bounds);
          j["consensus_bound"] = c.value;
          auto& ks = j["dist"] = nlohmann::json::array();
          for (const auto& d : c.per_k) ks.push_back({{"k", d.k}, {"l", d.l}, {"graphs", d.graphs}});
        }
        const auto p = igraph::is_permissive(spec, states);
        j["permissive"] = p.permissive;
        if (p.offending) j["offending_pair"] = {p.offending->first.text(), p.offending->second.text()};
        out() << j.dump(2) << '\n';
      } else {
        if (a_bag.empty()) throw UsageError("analyze needs --bag (or --facts)");
        const auto g = igraph::build_graph(spec, parse_state(spec, a_state), igraph::parse_bag(a_bag), mode, a_bound);
        out() << igraph::export_graph(g, spec, a_format == "dot" ? igraph::Format::Dot : igraph::Format::Json);
      }
      return 0;
    }
    if (*adjusts) {
      CatalogParams params{parse_elements(j_elements)};
      const auto adj = catalog(j_adjusted, params), base = catalog(j_base, params);
      auto states = reachable_states(base, j_depth);
      for (const auto& s : reachable_states(adj, j_depth)) {
        if (std::find(states.begin(), states.end(), s) == states.end()) states.push_back(s);
      }
      const auto rep = check_adjusts(adj, base, states);
      out() << to_json(rep, base).dump(2) << '\n';
      return rep.pass || !j_expect ? 0 : 1;
    }
    if (*lincheck) {
      const auto spec = catalog(l_spec);
      const auto h = lin::history_from_jsonl(read_input(l_history));
      lin::CheckOptions opt;
      opt.max_completed = l_max;
      const auto res = lin::check(h, spec, parse_state(spec, l_state), opt);
      out() << lin::to_json(res, h).dump(2) << '\n';
      return res.linearizable || !l_expect ? 0 : 1;
    }
    if (*micro) {
      if (m_full) m = bench::full_scale(m);
      if (m_max_ops > 0) m.max_ops = m_max_ops;
      bench::validate(m);
      warn_threads(m.threads);
      auto rep = bench::micro_run(m);
      if (m_compare) {
        if (auto b = bench::baseline_of(m.object)) {
          auto bc = m;
          bc.object = *b;
          bench::attach_baseline(rep, bench::micro_run(bc));
        } else {
          throw UsageError(m.object + " is already a baseline");
        }
      }
      out() << (m_out == "csv" ? bench::report_csv(rep) : bench::report_json(rep).dump(2) + "\n");
      return 0;
    }
    if (*retwis) {
      r.mix = bench::parse_mix(r_mix);
      if (r_full) {
        r.duration = 20;
        r.warmup = 5;
        r.runs = 10;
      }
      if (r_max_ops > 0) r.max_ops = r_max_ops;
      bench::validate(r);
      warn_threads(r.threads);
      const auto res = bench::retwis_run(r);
      if (r_out == "csv") {
        out() << bench::report_csv(res.report);
      } else {
        auto j = bench::report_json(res.report);
        j["audit"] = {{"ok", res.audit.ok()},
                      {"symmetric", res.audit.symmetric},
                      {"community_profiles", res.audit.community_profiles},
                      {"timeline_authors", res.audit.timeline_authors},
                      {"timeline_cap", res.audit.timeline_cap},
                      {"users", res.audit.users},
                      {"edges", res.audit.edges},
                      {"problems", res.audit.problems}};
        out() << j.dump(2) << '\n';
      }
      if (!res.audit.ok()) {
        for (const auto& p : res.audit.problems) std::cerr << "invariant: " << p << '\n';
        return r_expect ? 1 : 0;
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
