#include "procforge/validate.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "procforge/token_game.hpp"

namespace procforge {

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
    return d.severity == Severity::Error;
  }));
}

std::vector<Diagnostic> ValidationReport::errors() const {
  std::vector<Diagnostic> out;
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::Error) out.push_back(d);
  }
  return out;
}

std::string to_string(const Diagnostic& d) {
  std::string out = d.severity == Severity::Error ? "error" : "warning";
  if (!d.element.empty()) out += " [" + d.element + "]";
  return out + ": " + d.message;
}

namespace {

constexpr std::size_t kSafetyStateBudget = 20000;

class Validator {
 public:
  explicit Validator(const ProcessModel& m) : m_(m) {}

  ValidationReport run() {
    bool references_ok = check_identifiers();
    references_ok = check_flow_references() && references_ok;
    check_events();
    if (m_.flows.size() > kMaxFlows) {
      error(m_.id, "marking exceeds 256 bits (" + std::to_string(m_.flows.size()) + " sequence flows)");
    }
    check_variables();
    check_nodes();
    check_conditions();
    check_interfaces();
    check_invocations();
    if (references_ok) {
      check_degrees();
      check_reachability();
      if (report_.valid() && m_.flows.size() <= kMaxFlows) check_safety();
    }
    return std::move(report_);
  }

 private:
  void error(const std::string& el, std::string msg) {
    report_.diagnostics.push_back({Severity::Error, el, std::move(msg)});
  }
  void warning(const std::string& el, std::string msg) {
    report_.diagnostics.push_back({Severity::Warning, el, std::move(msg)});
  }

  bool check_identifiers() {
    std::set<std::string> ids;
    bool ok = true;
    auto claim = [&](const std::string& id, const char* what) {
      if (id.empty()) {
        error(id, std::string(what) + " without id");
        ok = false;
      } else if (!ids.insert(id).second) {
        error(id, "duplicate id '" + id + "'");
        ok = false;
      }
    };
    for (const auto& n : m_.nodes) claim(n.id, "node");
    for (const auto& f : m_.flows) claim(f.id, "sequence flow");
    for (const auto& i : m_.interfaces) claim(i.id, "smart contract interface");
    for (const auto& inv : m_.invocations) {
      if (!inv.id.empty()) claim(inv.id, "invocation");
    }

    std::set<std::string> task_names;
    for (const auto& n : m_.nodes) {
      if (!is_task(n.kind)) continue;
      if (!task_names.insert(label_of(n)).second) {
        error(n.id, "duplicate task name '" + label_of(n) + "'");
      }
    }
    return ok;
  }

  bool check_flow_references() {
    bool ok = true;
    for (const auto& f : m_.flows) {
      if (m_.find_node(f.source) == nullptr) {
        error(f.id, "dangling flow source '" + f.source + "'");
        ok = false;
      }
      if (m_.find_node(f.target) == nullptr) {
        error(f.id, "dangling flow target '" + f.target + "'");
        ok = false;
      }
      if (f.source == f.target) error(f.id, "sequence flow loops onto its own source");
    }
    return ok;
  }

  void check_events() {
    auto starts = std::count_if(m_.nodes.begin(), m_.nodes.end(),
                                [](const Node& n) { return n.kind == NodeKind::StartEvent; });
    auto ends = std::count_if(m_.nodes.begin(), m_.nodes.end(),
                              [](const Node& n) { return n.kind == NodeKind::EndEvent; });
    if (starts != 1) error(m_.id, "process must have exactly one start event, found " + std::to_string(starts));
    if (ends < 1) error(m_.id, "process must have at least one end event");
  }

  void check_variables() {
    std::set<std::string> names;
    for (const auto& v : m_.variables) {
      if (!names.insert(v.name).second) error(v.name, "duplicate variable '" + v.name + "'");
      if (v.type == Type::IntLiteral) error(v.name, "variable has no concrete type");
      if (v.initial && !coerce(*v.initial, v.type)) {
        error(v.name, "initial value " + v.initial->to_string() + " does not match type " +
                          std::string(type_name(v.type)));
      }
    }
  }

  void check_nodes() {
    TypeScope vars = m_.scope_for(nullptr);
    for (const auto& n : m_.nodes) {
      if (!n.inputs.empty() && n.kind != NodeKind::UserTask) {
        error(n.id, "only user tasks declare task inputs");
      }
      std::set<std::string> input_names;
      for (const auto& in : n.inputs) {
        if (!input_names.insert(in.name).second) error(n.id, "duplicate task input '" + in.name + "'");
        if (const auto* v = m_.find_variable(in.name); v != nullptr && v->type != in.type) {
          error(n.id, "task input '" + in.name + "' is " + std::string(type_name(in.type)) +
                          " but the process variable is " + std::string(type_name(v->type)));
        }
      }
      if (!n.script.empty() && n.kind != NodeKind::ScriptTask) error(n.id, "only script tasks carry scripts");
      for (const auto& st : n.script) {
        try {
          check_statement(st, vars);
        } catch (const TypeError& e) {
          error(n.id, std::string("script: ") + e.what());
        }
      }
    }
  }

  void check_conditions() {
    TypeScope vars = m_.scope_for(nullptr);
    std::map<std::string, int> defaults;
    for (const auto& f : m_.flows) {
      const Node* src = m_.find_node(f.source);
      bool from_xor = src != nullptr && src->kind == NodeKind::XorGateway;
      if (f.condition && !from_xor) {
        error(f.id, "conditions are only allowed on outgoing flows of exclusive gateways");
      }
      if (f.is_default && !from_xor) {
        error(f.id, "default flows are only allowed on outgoing flows of exclusive gateways");
      }
      if (f.is_default && from_xor && ++defaults[f.source] == 2) {
        error(f.source, "exclusive gateway has more than one default flow");
      }
      if (f.is_default && f.condition) warning(f.id, "condition on a default flow is ignored");
      if (f.condition) {
        try {
          Type t = check_expr(*f.condition, vars);
          if (t != Type::Bool) error(f.id, "condition must be bool, got " + std::string(type_name(t)));
        } catch (const TypeError& e) {
          error(f.id, std::string("condition: ") + e.what());
        }
      }
    }
    for (const auto& n : m_.nodes) {
      if (n.kind != NodeKind::XorGateway) continue;
      auto outs = m_.outgoing(n.id);
      if (outs.size() < 2) continue;
      for (const auto* f : outs) {
        if (!f->condition && !f->is_default) {
          warning(f->id, "unconditioned exclusive branch is always eligible");
        }
      }
    }
  }

  void check_interfaces() {
    for (const auto& iface : m_.interfaces) {
      std::set<std::string> fns;
      for (const auto& fn : iface.functions) {
        if (!fns.insert(fn.name).second) error(iface.id, "duplicate function '" + fn.name + "'");
        std::set<std::string> ins;
        for (const auto& p : fn.inputs) {
          if (!ins.insert(p.name).second) error(iface.id, fn.name + ": duplicate input parameter '" + p.name + "'");
        }
        std::set<std::string> outs;
        for (const auto& p : fn.outputs) {
          if (p.name.empty()) continue;
          if (!outs.insert(p.name).second) error(iface.id, fn.name + ": duplicate output parameter '" + p.name + "'");
        }
      }
    }
  }

  void check_invocations() {
    for (std::size_t i = 0; i < m_.invocations.size(); ++i) {
      const auto& inv = m_.invocations[i];
      std::string el = inv.id.empty() ? inv.source_task + "->" + inv.fn_name : inv.id;
      const Node* task = m_.find_node(inv.source_task);
      if (task == nullptr) {
        error(el, "invocation source task '" + inv.source_task + "' does not exist");
        continue;
      }
      if (!is_task(task->kind)) {
        error(el, "invocation source '" + inv.source_task + "' is not a task");
        continue;
      }
      if (inv.sender_is_caller && !is_external(task->kind)) {
        error(el, "sender=\"caller\" needs a user or default task; script tasks run without a caller");
      }
      const InterfaceDecl* iface = m_.find_interface(inv.target_interface);
      if (iface == nullptr) {
        error(el, "invocation target interface '" + inv.target_interface + "' does not exist");
        continue;
      }
      const FunctionDecl* fn = iface->find_function(inv.fn_name);
      if (fn == nullptr) {
        error(el, "function '" + inv.fn_name + "' is not declared on interface '" + iface->name + "'");
        continue;
      }

      std::map<std::string, int> bound;
      for (const auto& b : inv.inputs) {
        auto p = std::find_if(fn->inputs.begin(), fn->inputs.end(),
                              [&](const FunctionParameter& fp) { return fp.name == b.param; });
        if (p == fn->inputs.end()) {
          error(el, "binding for unknown input parameter '" + b.param + "'");
          continue;
        }
        if (++bound[b.param] == 2) error(el, "input parameter '" + b.param + "' bound more than once");
        check_source(el, *task, b.source, p->type);
      }
      for (const auto& p : fn->inputs) {
        if (bound.count(p.name) == 0) error(el, "input parameter '" + p.name + "' is not bound");
      }

      std::map<std::string, int> outs;
      for (const auto& b : inv.outputs) {
        auto p = std::find_if(fn->outputs.begin(), fn->outputs.end(),
                              [&](const FunctionParameter& fp) { return fp.name == b.output; });
        if (p == fn->outputs.end()) {
          error(el, "binding for unknown return value '" + b.output + "'");
          continue;
        }
        if (++outs[b.output] == 2) error(el, "return value '" + b.output + "' bound more than once");
        const VariableDecl* v = m_.find_variable(b.target);
        if (v == nullptr) {
          error(el, "return value '" + b.output + "' targets undeclared variable '" + b.target + "'");
        } else if (v->type != p->type) {
          error(el, "return value '" + b.output + "' is " + std::string(type_name(p->type)) +
                        " but variable '" + b.target + "' is " + std::string(type_name(v->type)));
        }
      }
    }
  }

  void check_source(const std::string& el, const Node& task, const BindingSource& src, Type want) {
    std::optional<Type> have;
    switch (src.kind) {
      case BindingSource::Kind::ProcessAddress:
        have = Type::Address;
        break;
      case BindingSource::Kind::Literal:
        if (!coerce(src.literal, want)) {
          error(el, "literal " + src.literal.to_string() + " does not fit parameter type " +
                        std::string(type_name(want)));
        }
        return;
      case BindingSource::Kind::TaskInput: {
        auto it = std::find_if(task.inputs.begin(), task.inputs.end(),
                               [&](const TaskInput& t) { return t.name == src.name; });
        if (it == task.inputs.end()) {
          error(el, "'" + src.name + "' is not an input of task '" + label_of(task) + "'");
          return;
        }
        have = it->type;
        break;
      }
      case BindingSource::Kind::Variable: {
        const VariableDecl* v = m_.find_variable(src.name);
        if (v == nullptr) {
          error(el, "binding source '" + src.name + "' is neither a process variable nor a task input");
          return;
        }
        have = v->type;
        break;
      }
    }
    if (have && *have != want) {
      error(el, "binding source '" + src.text + "' is " + std::string(type_name(*have)) +
                    " but the parameter is " + std::string(type_name(want)));
    }
  }

  void check_degrees() {
    for (const auto& n : m_.nodes) {
      auto in = m_.incoming(n.id).size();
      auto out = m_.outgoing(n.id).size();
      switch (n.kind) {
        case NodeKind::StartEvent:
          if (in > 0) error(n.id, "start event has incoming flows");
          if (out == 0) error(n.id, "start event has no outgoing flow");
          break;
        case NodeKind::EndEvent:
          if (out > 0) error(n.id, "end event has outgoing flows");
          break;
        case NodeKind::DefaultTask:
        case NodeKind::UserTask:
        case NodeKind::ScriptTask:
          if (in > 1) error(n.id, "task has more than one incoming flow; merge with a gateway");
          if (out > 1) error(n.id, "task has more than one outgoing flow; split with a gateway");
          if (out == 0) error(n.id, "task has no outgoing flow");
          break;
        case NodeKind::XorGateway:
        case NodeKind::AndGateway:
          if (out == 0) error(n.id, "gateway has no outgoing flow");
          break;
      }
    }
  }

  void check_reachability() {
    std::map<std::string, std::vector<std::string>> fwd;
    std::map<std::string, std::vector<std::string>> back;
    for (const auto& f : m_.flows) {
      fwd[f.source].push_back(f.target);
      back[f.target].push_back(f.source);
    }
    auto bfs = [](std::deque<std::string> queue, std::map<std::string, std::vector<std::string>>& adj) {
      std::set<std::string> seen(queue.begin(), queue.end());
      while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (const auto& nxt : adj[cur]) {
          if (seen.insert(nxt).second) queue.push_back(nxt);
        }
      }
      return seen;
    };
    std::deque<std::string> starts;
    std::deque<std::string> ends;
    for (const auto& n : m_.nodes) {
      if (n.kind == NodeKind::StartEvent) starts.push_back(n.id);
      if (n.kind == NodeKind::EndEvent) ends.push_back(n.id);
    }
    if (starts.empty() || ends.empty()) return;
    auto from_start = bfs(starts, fwd);
    auto to_end = bfs(ends, back);
    for (const auto& n : m_.nodes) {
      if (from_start.count(n.id) == 0) error(n.id, "'" + label_of(n) + "' is not reachable from the start event");
      if (to_end.count(n.id) == 0) error(n.id, "'" + label_of(n) + "' cannot reach an end event");
    }
  }

  void check_safety() {
    TokenGame game(m_);
    if (auto node = game.find_unsafe_firing(kSafetyStateBudget)) {
      warning(*node, "firing can activate an already active sequence flow (unsafe model)");
    }
  }

  const ProcessModel& m_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_model(const ProcessModel& model) { return Validator(model).run(); }

}  // namespace procforge
