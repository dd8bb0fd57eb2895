#pragma once

// Concurrent histories and a brute-force linearizability check against a
// sequential specification.

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adjusted/seqspec.hpp"

namespace adjusted::lin {

enum class EventKind : std::uint8_t { Invoke, Respond };

struct Event {
  std::uint64_t ts = 0;
  int thread = 0;
  EventKind kind = EventKind::Invoke;
  OpInstance op;
  Response resp;  // respond events only
};

struct History {
  std::string object;
  std::vector<Event> events;  // ascending ts
};

/// Description of the first well-formedness violation, if any.
std::optional<std::string> well_formed(const History& h);

/// One call: an invocation and its response, if it has one.
struct Call {
  int thread = 0;
  OpInstance op;
  std::size_t invoke = 0;                 // event index
  std::optional<std::size_t> respond;     // event index
  std::optional<Response> resp;
};

std::vector<Call> calls(const History& h);

struct Witness {
  std::vector<std::size_t> order;   // call indices in linearization order
  std::vector<Response> responses;  // per position, from the spec
};

struct CheckOptions {
  std::size_t max_completed = 20;
};

struct CheckResult {
  bool linearizable = false;
  std::optional<Witness> witness;
  /// Shortest event prefix that already has no linearization.
  std::optional<std::size_t> violating_prefix;
  std::size_t explored = 0;
};

/// Throws UsageError if the history is malformed or has more completed
/// calls than the bound.
CheckResult check(const History& h, const DataTypeSpec& spec, const CheckOptions& opt = {});
CheckResult check(const History& h, const DataTypeSpec& spec, const State& init,
                  const CheckOptions& opt = {});

/// Independent replay: the witness respects real-time order, contains every
/// completed call, and replays with the recorded responses.
bool verify_witness(const History& h, const DataTypeSpec& spec, const State& init,
                    const Witness& w);

History prefix(const History& h, std::size_t events);

// ---------------------------------------------------------------------------
// Recording

/// Process-wide monotonic tick.
std::uint64_t tick();

/// Collects events into per-thread buffers; threads are numbered 0..n-1 by
/// the caller, and each thread only touches its own buffer.
class Recorder {
 public:
  explicit Recorder(int threads, std::string object = {});

  template <class F>
  Response call(int thread, OpInstance op, F&& body) {
    auto& buf = buffers_[static_cast<std::size_t>(thread)].events;
    op.id = static_cast<int>(buf.size());
    buf.push_back({tick(), thread, EventKind::Invoke, op, Response::none()});
    Response r = body();
    buf.push_back({tick(), thread, EventKind::Respond, std::move(op), r});
    return r;
  }

  /// Merges the buffers. Call after all recording threads finished.
  History history() const;

 private:
  struct alignas(64) Buffer {
    std::vector<Event> events;
  };
  std::string object_;
  std::vector<Buffer> buffers_;
};

// ---------------------------------------------------------------------------
// Line-delimited JSON: {"ts","thread","kind","op","args","resp"}

std::string to_jsonl(const History& h);
History history_from_jsonl(const std::string& text);
nlohmann::json to_json(const CheckResult& r, const History& h);

}  // namespace adjusted::lin
