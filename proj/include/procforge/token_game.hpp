#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "procforge/model.hpp"

namespace procforge {

/// Brute-force BPMN token game over the unfolded model: every gateway, script
/// task, and end event is its own transition, markings are sets of flow ids,
/// and exclusive choices are explored exhaustively. Shares no code with the
/// marking compiler so it can serve as a conformance oracle for it.
class TokenGame {
 public:
  using State = std::set<std::string>;

  struct Verdict {
    bool conforming = false;
    /// Index of the first event that could not be executed, or the trace
    /// length when every event ran but completion was not reached.
    std::size_t first_bad = 0;
    bool end_not_reached = false;
  };

  explicit TokenGame(const ProcessModel& model);

  /// Quiescent states reachable by firing automatic transitions from `s`.
  [[nodiscard]] std::set<State> settle(const State& s) const;

  [[nodiscard]] std::set<State> initial_states() const;

  /// States after invoking `task` (name or id) from any of `from`, settled.
  [[nodiscard]] std::set<State> step(const std::set<State>& from, const std::string& task) const;

  [[nodiscard]] Verdict classify(const std::vector<std::string>& trace, bool strict) const;

  /// Every task sequence of length <= max_len that executes event by event,
  /// mapped to whether it can end with no active flow.
  [[nodiscard]] std::map<std::vector<std::string>, bool> language(std::size_t max_len) const;

  /// Finds a reachable firing that would put a token on an already active
  /// flow. Returns the node id, or nothing if none was found within budget.
  [[nodiscard]] std::optional<std::string> find_unsafe_firing(std::size_t state_budget) const;

  /// External task labels in document order.
  [[nodiscard]] const std::vector<std::string>& alphabet() const { return alphabet_; }

 private:
  struct Firing {
    State consumed_state;
    std::vector<std::string> produced;
  };

  [[nodiscard]] std::vector<Firing> firings(const Node& n, const State& s) const;

  const ProcessModel& model_;
  std::vector<std::string> alphabet_;
};

}  // namespace procforge
