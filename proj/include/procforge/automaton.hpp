#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "procforge/marking.hpp"
#include "procforge/model.hpp"

namespace procforge {

/// One way of firing a transition: consume `pre`, produce `post`.
struct Alternative {
  Marking pre;
  Marking post;

  friend bool operator==(const Alternative&, const Alternative&) = default;
};

/// A user or default task, with adjacent condition-free gateways folded in.
struct ExternalTransition {
  const Node* node = nullptr;
  std::vector<Alternative> alternatives;
};

/// One outgoing choice of an exclusive split.
struct Branch {
  Marking post;
  ExprPtr guard;
  bool is_default = false;
  std::string flow_id;
};

/// Script task, unfolded gateway, or end event; fired by eager closure.
struct AutoTransition {
  const Node* node = nullptr;
  /// Consumption alternatives, lowest index preferred.
  std::vector<Marking> pre;
  /// Produced bits for non-exclusive transitions (zero for end events).
  Marking post;
  /// Non-empty only for exclusive splits; exactly one branch is taken.
  std::vector<Branch> branches;

  [[nodiscard]] bool exclusive() const { return !branches.empty(); }
};

enum class AutomatonErrorKind {
  NotEnabled,
  NoBranchTaken,
  NonTerminatingClosure,
  ScriptError,
  UnknownTask,
  BadArgument,
  Internal,
};

std::string_view automaton_error_name(AutomatonErrorKind k);

class AutomatonError : public std::runtime_error {
 public:
  AutomatonError(AutomatonErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] AutomatonErrorKind kind() const { return kind_; }

 private:
  AutomatonErrorKind kind_;
};

enum class ClosureMode { Data, NonDeterministic };

/// Called after a script task's statements ran in Data mode, so the caller
/// can perform the task's registry invocations, and when an end event fires.
/// May throw to abort.
using ScriptHook = std::function<void(const Node&, VarEnv&)>;

struct FireResult {
  Marking marking;
  VarEnv env;
  std::size_t alternative = 0;
};

/// Compiled process: holds pointers into the model it was compiled from,
/// which must outlive it.
class MarkingAutomaton {
 public:
  [[nodiscard]] const ProcessModel& model() const { return *model_; }
  [[nodiscard]] std::size_t flow_count() const { return flow_ids_.size(); }
  [[nodiscard]] std::size_t bit_of(std::string_view flow_id) const;
  [[nodiscard]] const std::vector<std::string>& flow_ids() const { return flow_ids_; }
  [[nodiscard]] const Marking& initial_marking() const { return initial_; }
  [[nodiscard]] const Marking& end_mask() const { return end_mask_; }
  [[nodiscard]] const std::vector<ExternalTransition>& externals() const { return externals_; }
  [[nodiscard]] const std::vector<AutoTransition>& autos() const { return autos_; }
  /// Gateways whose behaviour was folded into an adjacent task.
  [[nodiscard]] const std::vector<std::string>& folded_gateways() const { return folded_; }

  /// External transition by task name or id.
  [[nodiscard]] const ExternalTransition* find_external(std::string_view name_or_id) const;

  /// Eager closure in Data mode: one deterministic outcome.
  [[nodiscard]] std::pair<Marking, VarEnv> close_data(Marking m, VarEnv env, const ScriptHook& hook = {}) const;
  /// Eager closure ignoring data: every quiescent marking reachable through
  /// any combination of exclusive branches.
  [[nodiscard]] std::set<Marking> close_nondeterministic(const Marking& m) const;
  /// Both modes behind one signature; NonDeterministic outcomes carry `env` unchanged.
  [[nodiscard]] std::vector<std::pair<Marking, VarEnv>> eager_closure(const Marking& m, const VarEnv& env,
                                                                      ClosureMode mode) const;

  /// (task index into externals(), alternative index) pairs enabled at `m`.
  [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> enabled_external(const Marking& m) const;
  /// Labels of the enabled external tasks, in document order, without duplicates.
  [[nodiscard]] std::vector<std::string> enabled_labels(const Marking& m) const;

  /// Fires the lowest enabled alternative of `task` and merges `args` into the
  /// environment (coerced to the declared input types). No closure is run.
  [[nodiscard]] FireResult fire_external(const Marking& m, const VarEnv& env, std::string_view task,
                                         const VarEnv& args = {}) const;

  /// Declared initial values; variables without one start at zero.
  [[nodiscard]] VarEnv initial_env() const;

  /// Human-readable mask table.
  [[nodiscard]] std::string dump() const;

 private:
  friend MarkingAutomaton compile_marking(const ProcessModel& model);

  Marking outgoing_bits(std::string_view node_id) const;

  const ProcessModel* model_ = nullptr;
  std::vector<std::string> flow_ids_;
  std::map<std::string, std::size_t, std::less<>> bits_;
  Marking initial_;
  Marking end_mask_;
  std::vector<ExternalTransition> externals_;
  std::vector<AutoTransition> autos_;
  std::vector<std::string> folded_;
};

/// Requires a model without validation errors. Bits follow sequence-flow
/// document order.
MarkingAutomaton compile_marking(const ProcessModel& model);

}  // namespace procforge
