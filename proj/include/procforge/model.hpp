#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procforge/address.hpp"
#include "procforge/expr.hpp"
#include "procforge/value.hpp"

namespace procforge {

enum class NodeKind { StartEvent, EndEvent, DefaultTask, UserTask, ScriptTask, XorGateway, AndGateway };

std::string_view node_kind_name(NodeKind k);

inline bool is_task(NodeKind k) {
  return k == NodeKind::DefaultTask || k == NodeKind::UserTask || k == NodeKind::ScriptTask;
}

/// Tasks invoked from outside the process (user and default tasks).
inline bool is_external(NodeKind k) {
  return k == NodeKind::DefaultTask || k == NodeKind::UserTask;
}

inline bool is_gateway(NodeKind k) {
  return k == NodeKind::XorGateway || k == NodeKind::AndGateway;
}

struct TaskInput {
  std::string name;
  Type type = Type::Uint256;

  friend bool operator==(const TaskInput&, const TaskInput&) = default;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::DefaultTask;
  std::string name;
  std::vector<TaskInput> inputs;
  std::vector<Statement> script;
  /// Original script body, kept for diagnostics.
  std::string script_text;
};

struct SequenceFlow {
  std::string id;
  std::string source;
  std::string target;
  ExprPtr condition;
  std::string condition_text;
  bool is_default = false;
};

struct VariableDecl {
  std::string name;
  Type type = Type::Uint256;
  std::optional<Value> initial;
};

struct FunctionParameter {
  std::string name;
  Type type = Type::Uint256;

  friend bool operator==(const FunctionParameter&, const FunctionParameter&) = default;
};

struct FunctionDecl {
  std::string name;
  std::vector<FunctionParameter> inputs;
  std::vector<FunctionParameter> outputs;

  friend bool operator==(const FunctionDecl&, const FunctionDecl&) = default;
};

struct InterfaceDecl {
  std::string id;
  std::string name;
  std::optional<Address> contract_address;
  std::vector<FunctionDecl> functions;

  [[nodiscard]] const FunctionDecl* find_function(std::string_view fn) const;
};

/// Where the value bound to a function input comes from.
struct BindingSource {
  enum class Kind { Variable, TaskInput, ProcessAddress, Literal };

  Kind kind = Kind::Variable;
  std::string name;
  Value literal;
  /// Source text as written in the model.
  std::string text;
};

struct InputBinding {
  std::string param;
  BindingSource source;
};

struct OutputBinding {
  std::string output;
  std::string target;
};

struct InvocationBinding {
  std::string id;
  std::string source_task;
  std::string target_interface;
  std::string fn_name;
  std::vector<InputBinding> inputs;
  std::vector<OutputBinding> outputs;
  /// Registry calls are made by the process account unless the invoking
  /// party is the sender (e.g. a buyer paying into escrow).
  bool sender_is_caller = false;
};

/// In-memory process model: BPMN control flow plus blockchain extensions.
struct ProcessModel {
  std::string id;
  std::string name;
  std::vector<Node> nodes;
  std::vector<SequenceFlow> flows;
  std::vector<VariableDecl> variables;
  std::vector<InterfaceDecl> interfaces;
  std::vector<InvocationBinding> invocations;
  std::vector<std::string> participants;

  [[nodiscard]] const Node* find_node(std::string_view id) const;
  [[nodiscard]] const SequenceFlow* find_flow(std::string_view id) const;
  [[nodiscard]] const VariableDecl* find_variable(std::string_view name) const;
  [[nodiscard]] const InterfaceDecl* find_interface(std::string_view id) const;

  /// Resolves a trace task reference: node name first, then node id.
  [[nodiscard]] const Node* find_task(std::string_view name_or_id) const;

  [[nodiscard]] std::vector<const SequenceFlow*> incoming(std::string_view node_id) const;
  [[nodiscard]] std::vector<const SequenceFlow*> outgoing(std::string_view node_id) const;
  [[nodiscard]] std::vector<const InvocationBinding*> invocations_of(std::string_view task_id) const;

  [[nodiscard]] std::size_t task_count() const;
  [[nodiscard]] std::size_t gateway_count() const;

  /// Declared variables plus the task's own inputs.
  [[nodiscard]] TypeScope scope_for(const Node* task) const;
};

/// Display label for a task: its name, or its id when unnamed.
inline const std::string& label_of(const Node& n) { return n.name.empty() ? n.id : n.name; }

}  // namespace procforge
