#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjusted/seqspec.hpp"

namespace adjusted::bench {

/// Per-thread measurement of one run.
struct ThreadSample {
  int run = 0;
  int thread = 0;
  std::uint64_t ops = 0;
  double seconds = 0;
  double ops_per_sec = 0;
};

struct BenchReport {
  std::string name;  // object id or retwis variant
  int threads = 0;
  std::vector<ThreadSample> samples;
  std::vector<double> per_thread;    // ops/s per thread, averaged over runs
  double aggregate = 0;              // sum of per_thread
  std::map<std::string, std::uint64_t> mix;  // operation counts, measured window
  std::uint64_t total_ops = 0;               // sum of sample ops
  std::optional<std::string> baseline;
  std::optional<double> ratio;  // per-thread throughput vs baseline
  nlohmann::json extra = nlohmann::json::object();
};

std::string report_csv(const BenchReport& r);
nlohmann::json report_json(const BenchReport& r);

/// Fills per_thread, aggregate and total_ops from samples.
void finalize(BenchReport& r);

struct MicroConfig {
  std::string object = "counter.adjusted";
  int threads = 1;
  int update_ratio = 100;         // percent
  std::size_t initial_size = 16384;
  std::size_t key_range = 32768;
  double duration = 5;            // seconds
  double warmup = 2;              // seconds
  int runs = 5;
  std::size_t batch = 1000;
  std::uint64_t seed = 1;
  /// Map updates touch only keys owned by the updating thread (key % threads).
  /// Turning this off breaks the CWMR contract of the adjusted maps.
  bool route_keys = true;
  /// When set, each thread runs exactly this many operations per run with
  /// no warmup and no timer (deterministic tests).
  std::optional<std::uint64_t> max_ops;
};

/// Long timing: 60 s runs after 30 s warmup, 30 runs.
MicroConfig full_scale(MicroConfig cfg);

std::vector<std::string> micro_objects();

/// Access class and spec the object's workload is validated against.
struct ObjectContract {
  std::string spec;
  AccessClass access_class;
};
ObjectContract micro_contract(const std::string& object);

/// Throws UsageError on invalid configurations or permission violations.
void validate(const MicroConfig& cfg);

BenchReport micro_run(const MicroConfig& cfg);

/// "counter.adjusted" -> "counter.baseline"; nullopt for baselines.
std::optional<std::string> baseline_of(const std::string& object);

/// Sets r.baseline and r.ratio (mean per-thread throughput of r over base).
void attach_baseline(BenchReport& r, const BenchReport& base);

}  // namespace adjusted::bench
