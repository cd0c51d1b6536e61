#include "procforge/model.hpp"

#include <algorithm>

namespace procforge {

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::StartEvent: return "startEvent";
    case NodeKind::EndEvent: return "endEvent";
    case NodeKind::DefaultTask: return "task";
    case NodeKind::UserTask: return "userTask";
    case NodeKind::ScriptTask: return "scriptTask";
    case NodeKind::XorGateway: return "exclusiveGateway";
    case NodeKind::AndGateway: return "parallelGateway";
  }
  return "?";
}

const FunctionDecl* InterfaceDecl::find_function(std::string_view fn) const {
  for (const auto& f : functions) {
    if (f.name == fn) return &f;
  }
  return nullptr;
}

const Node* ProcessModel::find_node(std::string_view node_id) const {
  for (const auto& n : nodes) {
    if (n.id == node_id) return &n;
  }
  return nullptr;
}

const SequenceFlow* ProcessModel::find_flow(std::string_view flow_id) const {
  for (const auto& f : flows) {
    if (f.id == flow_id) return &f;
  }
  return nullptr;
}

const VariableDecl* ProcessModel::find_variable(std::string_view var) const {
  for (const auto& v : variables) {
    if (v.name == var) return &v;
  }
  return nullptr;
}

const InterfaceDecl* ProcessModel::find_interface(std::string_view iface) const {
  for (const auto& i : interfaces) {
    if (i.id == iface) return &i;
  }
  return nullptr;
}

const Node* ProcessModel::find_task(std::string_view name_or_id) const {
  for (const auto& n : nodes) {
    if (is_task(n.kind) && n.name == name_or_id) return &n;
  }
  for (const auto& n : nodes) {
    if (is_task(n.kind) && n.id == name_or_id) return &n;
  }
  return nullptr;
}

std::vector<const SequenceFlow*> ProcessModel::incoming(std::string_view node_id) const {
  std::vector<const SequenceFlow*> out;
  for (const auto& f : flows) {
    if (f.target == node_id) out.push_back(&f);
  }
  return out;
}

std::vector<const SequenceFlow*> ProcessModel::outgoing(std::string_view node_id) const {
  std::vector<const SequenceFlow*> out;
  for (const auto& f : flows) {
    if (f.source == node_id) out.push_back(&f);
  }
  return out;
}

std::vector<const InvocationBinding*> ProcessModel::invocations_of(std::string_view task_id) const {
  std::vector<const InvocationBinding*> out;
  for (const auto& inv : invocations) {
    if (inv.source_task == task_id) out.push_back(&inv);
  }
  return out;
}

std::size_t ProcessModel::task_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return is_task(n.kind); }));
}

std::size_t ProcessModel::gateway_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return is_gateway(n.kind); }));
}

TypeScope ProcessModel::scope_for(const Node* task) const {
  TypeScope scope;
  for (const auto& v : variables) scope.emplace(v.name, v.type);
  if (task != nullptr) {
    for (const auto& in : task->inputs) scope.insert_or_assign(in.name, in.type);
  }
  return scope;
}

}  // namespace procforge
