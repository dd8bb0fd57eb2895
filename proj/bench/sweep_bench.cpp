// Serial vs OpenMP timing of the analysis sweeps. Prints CSV:
// task,serial_s,parallel_s,speedup,threads,agree

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <algorithm>
#include <string>

#include "adjusted/igraph.hpp"

#ifdef ADJUSTED_HAVE_OPENMP
#include <omp.h>
#endif

using namespace adjusted;
using namespace adjusted::igraph;

namespace {

template <class F>
double best_of(int repeat, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs parallel analysis sweeps"};
  int repeat = 3;
  std::size_t kmax = 4;
  int depth = 3;
  app.add_option("--repeat", repeat, "Timed repetitions, best kept")->capture_default_str();
  app.add_option("--kmax", kmax, "Largest bag size for the consensus sweep")->capture_default_str();
  app.add_option("--depth", depth, "BFS depth of start states")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

#ifdef ADJUSTED_HAVE_OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif

  std::printf("task,serial_s,parallel_s,speedup,threads,agree\n");
  for (const auto& name : catalog_names()) {
    auto spec = catalog(name);
    auto states = reachable_states(spec, depth);
    auto bags = default_bags(spec, 200);
    const bool readable = std::any_of(spec.templates.begin(), spec.templates.end(),
                                      [](const OpTemplate& t) { return t.role == Role::Reader; });

    if (readable) {
      ConsensusEstimate serial, parallel;
      GeneratorBounds b;
      b.exec = Execution::Serial;
      const double ts = best_of(repeat, [&] { serial = consensus_bound(spec, kmax, states, bags, b); });
      b.exec = Execution::Parallel;
      const double tp = best_of(repeat, [&] { parallel = consensus_bound(spec, kmax, states, bags, b); });
      std::printf("consensus_bound(%s),%.6f,%.6f,%.2f,%d,%d\n", name.c_str(), ts, tp, ts / tp, threads,
                  serial.value == parallel.value);
    }

    std::vector<std::vector<OpInstance>> mover_bags;
    for (std::size_t k = 2; k <= 3; ++k)
      for (auto& bag : enumerate_bags(spec, k, 200)) mover_bags.push_back(bag);
    const std::string tmpl = spec.templates.front().name;
    MoverVerdict ms, mp;
    const double ts = best_of(repeat, [&] { ms = is_left_mover(spec, tmpl, states, mover_bags, Execution::Serial); });
    const double tp = best_of(repeat, [&] { mp = is_left_mover(spec, tmpl, states, mover_bags, Execution::Parallel); });
    std::printf("is_left_mover(%s.%s),%.6f,%.6f,%.2f,%d,%d\n", name.c_str(), tmpl.c_str(), ts, tp, ts / tp, threads,
                ms.holds == mp.holds && ms.checked == mp.checked);
  }
  return 0;
}
