#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "procforge/automaton.hpp"
#include "procforge/interpreter.hpp"
#include "procforge/registry.hpp"

namespace procforge {

using Trace = std::vector<TraceEvent>;

/// Strict traces must complete the process; Prefix traces need only be executable.
enum class TraceMode { Strict, Prefix };

std::string_view trace_mode_name(TraceMode m);

enum class HarnessErrorKind { TraceFormat, BudgetExceeded, MutationExhausted, BadConfig };

std::string_view harness_error_name(HarnessErrorKind k);

class HarnessError : public std::runtime_error {
 public:
  HarnessError(HarnessErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] HarnessErrorKind kind() const { return kind_; }

 private:
  HarnessErrorKind kind_;
};

/// Reads one `{"task", "args"?, "caller"?}` object per non-blank line. Args
/// are typed after the task's declared inputs when the task is known.
/// TraceFormat errors name the 1-based line.
Trace read_trace(std::string_view jsonl, const ProcessModel& model);
std::string write_trace(const Trace& trace);

/// Event without args or caller.
Trace plain_trace(const std::vector<std::string>& tasks);
std::vector<std::string> task_names(const Trace& trace);

struct Verdict {
  bool conforming = false;
  /// First event that could not run; equals the trace length when every
  /// event ran but a Strict trace did not complete.
  std::size_t first_bad = 0;
  bool end_not_reached = false;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Everything a data-bearing trace needs to run against registries.
struct DataContext {
  std::vector<RegistrySpec> specs;
  Address deployer;
};

/// Traces without args or callers are searched over every branch choice of
/// the automaton. Any event carrying data switches the whole trace to a
/// fresh interpreter instance with the context's registries deployed.
Verdict classify(const MarkingAutomaton& automaton, const Trace& trace, TraceMode mode,
                 const DataContext& data = {});

/// Every task sequence of length <= max_len that the automaton accepts
/// under branch search, sorted. `state_budget` caps the explored prefixes.
std::vector<std::vector<std::string>> enumerate_conforming(const MarkingAutomaton& automaton, std::size_t max_len,
                                                           TraceMode mode, std::size_t state_budget = 1'000'000);

struct OperatorWeights {
  double add = 1;
  double remove = 1;
  double swap = 1;
};

/// Uniform draw in [0, n) by modulo, so results depend on mt19937_64 alone.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n);

/// Applies one of add/remove/swap, redrawing until the result differs from
/// every trace in `avoid` (at most 100 draws, then MutationExhausted).
/// Added events are task names from `alphabet` without args.
Trace mutate(const Trace& trace, std::mt19937_64& rng, const OperatorWeights& weights,
             const std::vector<std::string>& alphabet, const std::vector<Trace>& avoid);

struct ExperimentConfig {
  std::size_t base_traces = 2;
  std::size_t mutants_per_base = 250;
  std::uint64_t seed = 42;
  OperatorWeights weights;
  TraceMode mode = TraceMode::Strict;
  /// Longest enumerated base trace; by default the number of external tasks.
  std::optional<std::size_t> max_len;
  std::size_t state_budget = 1'000'000;
  /// Worker threads for classification; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct Disagreement {
  std::size_t index = 0;
  std::vector<std::string> trace;
  Verdict interpreter;
  Verdict oracle;
};

struct Report {
  std::string model_id;
  std::uint64_t seed = 0;
  TraceMode mode = TraceMode::Strict;
  std::size_t tasks = 0;
  std::size_t gateways = 0;
  std::size_t base_traces = 0;
  std::size_t mutants_per_base = 0;
  std::vector<std::vector<std::string>> bases;
  std::size_t conforming = 0;
  std::size_t non_conforming = 0;
  double correctness_pct = 0;
  std::vector<Disagreement> disagreements;
  std::int64_t elapsed_ms = 0;

  [[nodiscard]] std::size_t total() const { return conforming + non_conforming; }
};

/// Picks base traces from the Strict language, generates mutants, and
/// classifies every trace with the automaton and with the token game.
Report run_experiment(const MarkingAutomaton& automaton, const ExperimentConfig& cfg);

/// Pretty JSON with a trailing newline. Without timing, `elapsedMs` is 0.
std::string report_json(const Report& report, bool with_timing = true);

}  // namespace procforge
