#include <algorithm>
#include <map>
#include <set>

#include "procforge/bpmn.hpp"
#include "procforge/xml.hpp"

namespace procforge {

std::string_view bpmn_error_name(BpmnErrorKind k) {
  switch (k) {
    case BpmnErrorKind::XmlSyntaxError: return "XmlSyntaxError";
    case BpmnErrorKind::UnknownElement: return "UnknownElement";
    case BpmnErrorKind::DanglingReference: return "DanglingReference";
    case BpmnErrorKind::DuplicateId: return "DuplicateId";
    case BpmnErrorKind::MalformedAddress: return "MalformedAddress";
    case BpmnErrorKind::ConditionParseError: return "ConditionParseError";
    case BpmnErrorKind::InvalidValue: return "InvalidValue";
    case BpmnErrorKind::MissingAttribute: return "MissingAttribute";
  }
  return "?";
}

BpmnError::BpmnError(BpmnErrorKind kind, const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(std::string(bpmn_error_name(kind)) + ": " + message +
                         (line && kind != BpmnErrorKind::XmlSyntaxError ? " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"
                               : std::string())),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

using xml::Element;

const std::set<std::string, std::less<>> kIgnoredBpmn = {
    "documentation", "incoming",          "outgoing",           "textAnnotation",  "association",
    "laneSet",       "dataObject",        "dataObjectReference", "dataStoreReference", "dataStore",
    "ioSpecification", "property",        "dataInputAssociation", "dataOutputAssociation"};

class BpmnReader {
 public:
  explicit BpmnReader(std::vector<Diagnostic>* warnings) : warnings_(warnings) {}

  ProcessModel read(const Element& root) {
    if (!root.is(kBpmnNamespace, "definitions")) {
      fail(BpmnErrorKind::UnknownElement, "root element must be bpmn:definitions, found <" + root.qname + ">", root);
    }
    const Element* process = nullptr;
    for (const auto& child : root.children) {
      if (!child.is(kBpmnNamespace, "process")) continue;
      if (process) fail(BpmnErrorKind::UnknownElement, "more than one process in the document", child);
      process = &child;
    }
    if (!process) fail(BpmnErrorKind::MissingAttribute, "document contains no bpmn:process", root);

    model_.id = required(*process, "id");
    if (auto* n = process->attribute("name")) model_.name = n->value;
    note_id(model_.id, *process);
    check_attributes(*process, {"id", "name", "isExecutable", "processType", "isClosed"});

    for (const auto& child : process->children) process_child(child);
    resolve();
    return std::move(model_);
  }

 private:
  [[noreturn]] static void fail(BpmnErrorKind kind, const std::string& msg, const Element& at) {
    throw BpmnError(kind, msg, at.position.line, at.position.column);
  }

  void warn(const std::string& element, const std::string& msg) {
    if (warnings_) warnings_->push_back({Severity::Warning, element, msg});
  }

  static std::string required(const Element& el, std::string_view attr) {
    const auto* a = el.attribute(attr);
    if (!a || a->value.empty()) {
      fail(BpmnErrorKind::MissingAttribute, "<" + el.qname + "> requires attribute '" + std::string(attr) + "'", el);
    }
    return a->value;
  }

  static std::string optional_attr(const Element& el, std::string_view attr) {
    const auto* a = el.attribute(attr);
    return a ? a->value : std::string();
  }

  void check_attributes(const Element& el, std::initializer_list<std::string_view> known) {
    for (const auto& a : el.attributes) {
      bool ok = false;
      if (a.ns.empty()) {
        for (auto k : known) ok = ok || a.local == k;
      } else if (a.ns == "http://www.w3.org/2001/XMLSchema-instance" && a.local == "type") {
        ok = true;
      }
      if (!ok) {
        std::string owner = optional_attr(el, "id");
        if (owner.empty()) owner = optional_attr(el, "name");
        warn(owner.empty() ? el.local : owner,
             "unknown attribute '" + a.qname + "' on <" + el.qname + "> (line " + std::to_string(el.position.line) + ")");
      }
    }
  }

  void note_id(const std::string& id, const Element& el) {
    if (!ids_.insert(id).second) fail(BpmnErrorKind::DuplicateId, "duplicate id '" + id + "'", el);
  }

  static Type type_attr(const Element& el) {
    std::string t = required(el, "type");
    auto type = parse_type(t);
    if (!type || *type == Type::IntLiteral) fail(BpmnErrorKind::InvalidValue, "unknown type '" + t + "'", el);
    return *type;
  }

  // --- process level -------------------------------------------------------

  void process_child(const Element& el) {
    if (el.ns == kBpmnNamespace) {
      const std::string& l = el.local;
      if (l == "startEvent") node(el, NodeKind::StartEvent);
      else if (l == "endEvent") node(el, NodeKind::EndEvent);
      else if (l == "task") node(el, NodeKind::DefaultTask);
      else if (l == "userTask") node(el, NodeKind::UserTask);
      else if (l == "scriptTask") node(el, NodeKind::ScriptTask);
      else if (l == "exclusiveGateway") node(el, NodeKind::XorGateway);
      else if (l == "parallelGateway") node(el, NodeKind::AndGateway);
      else if (l == "sequenceFlow") flow(el);
      else if (l == "extensionElements") {
        for (const auto& c : el.children) {
          if (c.ns == kBcextNamespace) extension(c);
          else fail(BpmnErrorKind::UnknownElement, "unsupported element <" + c.qname + "> in process extensionElements", c);
        }
      } else if (kIgnoredBpmn.contains(l)) {
        if (auto* id = el.attribute("id")) note_id(id->value, el);
      } else {
        fail(BpmnErrorKind::UnknownElement, "unsupported BPMN element <" + el.qname + ">", el);
      }
      return;
    }
    if (el.ns == kBcextNamespace) {
      extension(el);
      return;
    }
    fail(BpmnErrorKind::UnknownElement, "element <" + el.qname + "> is neither BPMN nor bcext", el);
  }

  void extension(const Element& el) {
    const std::string& l = el.local;
    if (l == "variables") {
      check_attributes(el, {});
      for (const auto& c : el.children) {
        if (!c.is(kBcextNamespace, "variable")) {
          fail(BpmnErrorKind::UnknownElement, "unexpected <" + c.qname + "> in bcext:variables", c);
        }
        variable(c);
      }
    } else if (l == "variable") {
      variable(el);
    } else if (l == "smartContractInterface") {
      interface(el);
    } else if (l == "invocation" || l == "connectionOutgoingContractInvocation") {
      invocation(el);
    } else if (l == "participant") {
      check_attributes(el, {"name"});
      model_.participants.push_back(required(el, "name"));
    } else {
      fail(BpmnErrorKind::UnknownElement, "unknown bcext element <" + el.qname + ">", el);
    }
  }

  // --- nodes and flows -------------------------------------------------------

  void node(const Element& el, NodeKind kind) {
    Node n;
    n.id = required(el, "id");
    note_id(n.id, el);
    n.kind = kind;
    n.name = optional_attr(el, "name");
    if (kind == NodeKind::XorGateway) {
      check_attributes(el, {"id", "name", "default", "gatewayDirection"});
      if (auto* d = el.attribute("default")) default_flows_.push_back({d->value, &el});
    } else if (kind == NodeKind::AndGateway) {
      check_attributes(el, {"id", "name", "gatewayDirection"});
    } else if (kind == NodeKind::ScriptTask) {
      check_attributes(el, {"id", "name", "scriptFormat"});
    } else {
      check_attributes(el, {"id", "name"});
    }

    bool saw_script = false;
    for (const auto& c : el.children) {
      if (c.ns == kBpmnNamespace && c.local == "script" && kind == NodeKind::ScriptTask) {
        if (saw_script) fail(BpmnErrorKind::UnknownElement, "script task has more than one <script>", c);
        saw_script = true;
        n.script_text = c.text;
        try {
          n.script = parse_script(c.text);
        } catch (const ConditionParseError& e) {
          fail(BpmnErrorKind::ConditionParseError, "script of '" + n.id + "': " + e.what(), c);
        }
      } else if (c.ns == kBpmnNamespace && c.local == "extensionElements") {
        for (const auto& x : c.children) {
          if (x.is(kBcextNamespace, "input") && kind == NodeKind::UserTask) {
            check_attributes(x, {"name", "type"});
            n.inputs.push_back({required(x, "name"), type_attr(x)});
          } else if (x.ns == kBcextNamespace && kind == NodeKind::UserTask) {
            fail(BpmnErrorKind::UnknownElement, "unknown bcext element <" + x.qname + "> in user task", x);
          } else {
            fail(BpmnErrorKind::UnknownElement,
                 "unsupported element <" + x.qname + "> in extensionElements of '" + n.id + "'", x);
          }
        }
      } else if (c.ns == kBpmnNamespace && kIgnoredBpmn.contains(c.local)) {
        continue;
      } else {
        fail(BpmnErrorKind::UnknownElement, "unsupported element <" + c.qname + "> inside '" + n.id + "'", c);
      }
    }
    model_.nodes.push_back(std::move(n));
  }

  void flow(const Element& el) {
    check_attributes(el, {"id", "name", "sourceRef", "targetRef"});
    SequenceFlow f;
    f.id = required(el, "id");
    note_id(f.id, el);
    f.source = required(el, "sourceRef");
    f.target = required(el, "targetRef");
    for (const auto& c : el.children) {
      if (c.is(kBpmnNamespace, "conditionExpression")) {
        check_attributes(c, {"language"});
        f.condition_text = c.text;
        try {
          f.condition = parse_condition(c.text);
        } catch (const ConditionParseError& e) {
          fail(BpmnErrorKind::ConditionParseError, "condition of '" + f.id + "': " + e.what(), c);
        }
      } else if (c.ns == kBpmnNamespace && kIgnoredBpmn.contains(c.local)) {
        continue;
      } else {
        fail(BpmnErrorKind::UnknownElement, "unsupported element <" + c.qname + "> inside '" + f.id + "'", c);
      }
    }
    flow_elements_.push_back(&el);
    model_.flows.push_back(std::move(f));
  }

  // --- extensions ------------------------------------------------------------

  void variable(const Element& el) {
    check_attributes(el, {"name", "type", "initial"});
    VariableDecl v;
    v.name = required(el, "name");
    v.type = type_attr(el);
    if (auto* init = el.attribute("initial")) v.initial = literal_for(init->value, v.type, el);
    model_.variables.push_back(std::move(v));
  }

  static Value literal_for(const std::string& text, Type type, const Element& el) {
    if (type == Type::String) return Value::string(text);
    if (type == Type::Address) {
      auto a = Address::parse(text);
      if (!a) fail(BpmnErrorKind::MalformedAddress, "'" + text + "' is not 0x followed by 40 hex digits", el);
      return Value::address(*a);
    }
    ExprPtr e;
    try {
      e = parse_condition(text);
    } catch (const ConditionParseError& err) {
      fail(BpmnErrorKind::InvalidValue, "initial value '" + text + "': " + err.what(), el);
    }
    std::optional<Value> v = constant(*e);
    if (v) v = coerce(*v, type);
    if (!v) fail(BpmnErrorKind::InvalidValue, "'" + text + "' is not a " + std::string(type_name(type)) + " literal", el);
    return *v;
  }

  // A literal, or a negated integer literal.
  static std::optional<Value> constant(const Expr& e) {
    if (e.kind == Expr::Kind::Literal) return e.literal;
    if (e.kind == Expr::Kind::Unary && e.unary_op == UnaryOp::Negate && e.lhs->kind == Expr::Kind::Literal &&
        e.lhs->literal.type() == Type::IntLiteral) {
      return Value::literal(-e.lhs->literal.as_int());
    }
    return std::nullopt;
  }

  void interface(const Element& el) {
    check_attributes(el, {"id", "name", "contractAddress"});
    InterfaceDecl d;
    d.id = required(el, "id");
    note_id(d.id, el);
    d.name = required(el, "name");
    if (auto* a = el.attribute("contractAddress")) {
      d.contract_address = Address::parse(a->value);
      if (!d.contract_address) {
        fail(BpmnErrorKind::MalformedAddress,
             "contractAddress '" + a->value + "' of '" + d.id + "' is not 0x followed by 40 hex digits", el);
      }
    }
    for (const auto& c : el.children) {
      if (!c.is(kBcextNamespace, "function")) {
        fail(BpmnErrorKind::UnknownElement, "unexpected <" + c.qname + "> in bcext:smartContractInterface", c);
      }
      check_attributes(c, {"name"});
      FunctionDecl fn;
      fn.name = required(c, "name");
      for (const auto& p : c.children) {
        check_attributes(p, {"name", "type"});
        if (p.is(kBcextNamespace, "input")) fn.inputs.push_back({required(p, "name"), type_attr(p)});
        else if (p.is(kBcextNamespace, "output")) fn.outputs.push_back({required(p, "name"), type_attr(p)});
        else fail(BpmnErrorKind::UnknownElement, "unexpected <" + p.qname + "> in bcext:function", p);
      }
      d.functions.push_back(std::move(fn));
    }
    model_.interfaces.push_back(std::move(d));
  }

  void invocation(const Element& el) {
    check_attributes(el, {"id", "sourceTask", "targetInterface", "fnName", "sender"});
    InvocationBinding b;
    b.id = optional_attr(el, "id");
    if (b.id.empty()) b.id = "invocation_" + std::to_string(model_.invocations.size() + 1);
    else note_id(b.id, el);
    b.source_task = required(el, "sourceTask");
    b.target_interface = required(el, "targetInterface");
    b.fn_name = required(el, "fnName");
    if (auto* s = el.attribute("sender")) {
      if (s->value == "caller") b.sender_is_caller = true;
      else if (s->value != "process") fail(BpmnErrorKind::InvalidValue, "sender must be 'process' or 'caller'", el);
    }
    for (const auto& c : el.children) {
      if (c.is(kBcextNamespace, "bindIn")) {
        check_attributes(c, {"param", "source"});
        InputBinding in;
        in.param = required(c, "param");
        in.source = binding_source(required(c, "source"), c);
        b.inputs.push_back(std::move(in));
      } else if (c.is(kBcextNamespace, "bindOut")) {
        check_attributes(c, {"return", "target"});
        b.outputs.push_back({required(c, "return"), required(c, "target")});
      } else {
        fail(BpmnErrorKind::UnknownElement, "unexpected <" + c.qname + "> in bcext:invocation", c);
      }
    }
    invocation_elements_.push_back(&el);
    model_.invocations.push_back(std::move(b));
  }

  static BindingSource binding_source(const std::string& text, const Element& el) {
    BindingSource s;
    s.text = text;
    if (text == "processAddress") {
      s.kind = BindingSource::Kind::ProcessAddress;
      return s;
    }
    ExprPtr e;
    try {
      e = parse_condition(text);
    } catch (const ConditionParseError& err) {
      fail(BpmnErrorKind::InvalidValue, "binding source '" + text + "': " + err.what(), el);
    }
    if (e->kind == Expr::Kind::Variable) {
      s.kind = BindingSource::Kind::Variable;
      s.name = e->name;
      return s;
    }
    if (auto v = constant(*e)) {
      s.kind = BindingSource::Kind::Literal;
      s.literal = *v;
      return s;
    }
    fail(BpmnErrorKind::InvalidValue,
         "binding source '" + text + "' must be a variable, task input, literal or processAddress", el);
  }

  // --- cross references ------------------------------------------------------

  void resolve() {
    for (std::size_t i = 0; i < model_.flows.size(); ++i) {
      const auto& f = model_.flows[i];
      if (!model_.find_node(f.source)) {
        fail(BpmnErrorKind::DanglingReference, "flow '" + f.id + "' has unknown sourceRef '" + f.source + "'",
             *flow_elements_[i]);
      }
      if (!model_.find_node(f.target)) {
        fail(BpmnErrorKind::DanglingReference, "flow '" + f.id + "' has unknown targetRef '" + f.target + "'",
             *flow_elements_[i]);
      }
    }
    for (const auto& [flow_id, el] : default_flows_) {
      auto it = std::find_if(model_.flows.begin(), model_.flows.end(),
                             [&](const SequenceFlow& f) { return f.id == flow_id; });
      if (it == model_.flows.end()) {
        fail(BpmnErrorKind::DanglingReference, "default flow '" + flow_id + "' does not exist", *el);
      }
      it->is_default = true;
    }
    for (std::size_t i = 0; i < model_.invocations.size(); ++i) {
      auto& b = model_.invocations[i];
      const Element& el = *invocation_elements_[i];
      const Node* task = model_.find_node(b.source_task);
      if (!task) fail(BpmnErrorKind::DanglingReference, "invocation sourceTask '" + b.source_task + "' is unknown", el);
      if (!model_.find_interface(b.target_interface)) {
        fail(BpmnErrorKind::DanglingReference,
             "invocation targetInterface '" + b.target_interface + "' is unknown", el);
      }
      for (auto& in : b.inputs) {
        if (in.source.kind != BindingSource::Kind::Variable) continue;
        bool is_input = std::any_of(task->inputs.begin(), task->inputs.end(),
                                    [&](const TaskInput& t) { return t.name == in.source.name; });
        if (is_input) in.source.kind = BindingSource::Kind::TaskInput;
      }
    }
  }

  std::vector<Diagnostic>* warnings_;
  ProcessModel model_;
  std::set<std::string> ids_;
  std::vector<std::pair<std::string, const Element*>> default_flows_;
  std::vector<const Element*> flow_elements_;
  std::vector<const Element*> invocation_elements_;
};

}  // namespace

ProcessModel parse_bpmn(std::string_view text, std::vector<Diagnostic>* warnings) {
  xml::Element root;
  try {
    root = xml::parse(text);
  } catch (const xml::SyntaxError& e) {
    throw BpmnError(BpmnErrorKind::XmlSyntaxError, e.what(), e.position().line, e.position().column);
  }
  return BpmnReader(warnings).read(root);
}

}  // namespace procforge
