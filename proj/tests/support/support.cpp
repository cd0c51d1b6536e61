#include "support.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "procforge/bpmn.hpp"

namespace testsupport {

std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(PROCFORGE_SOURCE_DIR) / relative;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

procforge::ProcessModel fixture_model(const std::string& relative) {
  return procforge::parse_bpmn(read_text(source_path("fixtures/" + relative)));
}

}  // namespace testsupport

namespace testsupport {

using namespace procforge;

ModelBuilder::ModelBuilder(std::string id) { model_.id = std::move(id); }

ModelBuilder& ModelBuilder::node(const std::string& id, NodeKind kind, const std::string& name) {
  Node n;
  n.id = id;
  n.kind = kind;
  n.name = name;
  model_.nodes.push_back(std::move(n));
  return *this;
}

ModelBuilder& ModelBuilder::flow(const std::string& source, const std::string& target, const std::string& condition,
                                 bool is_default) {
  SequenceFlow f;
  f.id = "f" + std::to_string(model_.flows.size() + 1);
  f.source = source;
  f.target = target;
  if (!condition.empty()) {
    f.condition = parse_condition(condition);
    f.condition_text = condition;
  }
  f.is_default = is_default;
  model_.flows.push_back(std::move(f));
  return *this;
}

ModelBuilder& ModelBuilder::variable(const std::string& name, Type type) {
  model_.variables.push_back({name, type, std::nullopt});
  return *this;
}

namespace {

class BlockGen {
 public:
  BlockGen(std::uint64_t seed, ProcessModel& m) : rng_(seed), m_(m) {}

  // Emits a block and returns its (entry node, exit node).
  std::pair<std::string, std::string> block(int depth) {
    std::uint64_t r = depth <= 0 ? 0 : pick(10);
    if (r < 4) return task();
    if (r < 6) {
      auto a = block(depth - 1);
      auto b = block(depth - 1);
      connect(a.second, b.first);
      return {a.first, b.second};
    }
    if (r < 8) return split(depth, pick(2) == 0 ? NodeKind::AndGateway : NodeKind::XorGateway);
    if (r < 9) return split(depth, NodeKind::XorGateway);
    return loop(depth);
  }

  void connect(const std::string& from, const std::string& to, const std::string& cond = "", bool def = false) {
    SequenceFlow f;
    f.id = "f" + std::to_string(m_.flows.size() + 1);
    f.source = from;
    f.target = to;
    if (!cond.empty()) {
      f.condition = parse_condition(cond);
      f.condition_text = cond;
    }
    f.is_default = def;
    m_.flows.push_back(std::move(f));
  }

  std::string add(NodeKind kind, const std::string& prefix) {
    Node n;
    n.id = prefix + std::to_string(++counter_);
    n.kind = kind;
    if (is_task(kind)) n.name = "Task " + n.id;
    if (kind == NodeKind::ScriptTask) {
      n.script = parse_script("count = count + 1");
      n.script_text = "count = count + 1";
    }
    m_.nodes.push_back(n);
    return n.id;
  }

 private:
  std::uint64_t pick(std::uint64_t n) { return rng_() % n; }

  std::pair<std::string, std::string> task() {
    static constexpr NodeKind kKinds[] = {NodeKind::UserTask, NodeKind::DefaultTask, NodeKind::UserTask,
                                          NodeKind::ScriptTask};
    std::string id = add(kKinds[pick(4)], "T");
    return {id, id};
  }

  std::pair<std::string, std::string> split(int depth, NodeKind kind) {
    std::string g = add(kind, "G");
    std::string j = add(kind, "J");
    std::size_t branches = 2 + pick(2);
    for (std::size_t i = 0; i < branches; ++i) {
      auto b = block(depth - 1);
      if (kind == NodeKind::XorGateway) {
        if (i + 1 == branches) connect(g, b.first, "", true);
        else connect(g, b.first, "flag");
      } else {
        connect(g, b.first);
      }
      connect(b.second, j);
    }
    return {g, j};
  }

  std::pair<std::string, std::string> loop(int depth) {
    std::string j = add(NodeKind::XorGateway, "L");
    auto body = block(depth - 1);
    std::string s = add(NodeKind::XorGateway, "X");
    connect(j, body.first);
    connect(body.second, s);
    connect(s, j, "flag");
    std::string exit = add(NodeKind::XorGateway, "Y");
    connect(s, exit, "", true);
    return {j, exit};
  }

  std::mt19937_64 rng_;
  ProcessModel& m_;
  int counter_ = 0;
};

}  // namespace

ProcessModel random_block_model(std::uint64_t seed, std::size_t max_flows) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    ProcessModel m;
    m.id = "Random_" + std::to_string(seed);
    m.variables.push_back({"flag", Type::Bool, std::nullopt});
    m.variables.push_back({"count", Type::Uint256, std::nullopt});
    BlockGen gen(seed * 1000003 + attempt, m);
    std::string s = gen.add(NodeKind::StartEvent, "S");
    auto body = gen.block(3);
    std::string e = gen.add(NodeKind::EndEvent, "E");
    gen.connect(s, body.first);
    gen.connect(body.second, e);
    if (m.flows.size() <= max_flows) return m;
  }
}

}  // namespace testsupport

namespace testsupport {

namespace {

using namespace procforge;

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\t': out += "&#9;"; break;
      case '\r': out += "&#13;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string_view element_of(NodeKind k) {
  switch (k) {
    case NodeKind::StartEvent: return "startEvent";
    case NodeKind::EndEvent: return "endEvent";
    case NodeKind::DefaultTask: return "task";
    case NodeKind::UserTask: return "userTask";
    case NodeKind::ScriptTask: return "scriptTask";
    case NodeKind::XorGateway: return "exclusiveGateway";
    case NodeKind::AndGateway: return "parallelGateway";
  }
  return "task";
}

std::string initial_text(const Value& v) {
  if (v.type() == Type::String) return v.as_string();
  return v.to_string();
}

std::string source_text(const BindingSource& s) {
  switch (s.kind) {
    case BindingSource::Kind::ProcessAddress: return "processAddress";
    case BindingSource::Kind::Variable:
    case BindingSource::Kind::TaskInput: return s.name;
    case BindingSource::Kind::Literal: return s.literal.to_string();
  }
  return s.text;
}

}  // namespace

std::string write_bpmn(const ProcessModel& m) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<bpmn:definitions xmlns:bpmn=\"" << kBpmnNamespace << "\" xmlns:bcext=\"" << kBcextNamespace
    << "\" id=\"defs_" << esc(m.id) << "\">\n";
  o << "  <bpmn:process id=\"" << esc(m.id) << "\"";
  if (!m.name.empty()) o << " name=\"" << esc(m.name) << "\"";
  o << ">\n";

  for (const auto& n : m.nodes) {
    auto tag = element_of(n.kind);
    o << "    <bpmn:" << tag << " id=\"" << esc(n.id) << "\"";
    if (!n.name.empty()) o << " name=\"" << esc(n.name) << "\"";
    if (n.kind == NodeKind::XorGateway) {
      for (const auto* f : m.outgoing(n.id)) {
        if (f->is_default) o << " default=\"" << esc(f->id) << "\"";
      }
    }
    bool body = n.kind == NodeKind::ScriptTask || !n.inputs.empty();
    if (!body) {
      o << "/>\n";
      continue;
    }
    o << ">\n";
    if (!n.inputs.empty()) {
      o << "      <bpmn:extensionElements>\n";
      for (const auto& in : n.inputs) {
        o << "        <bcext:input name=\"" << esc(in.name) << "\" type=\"" << type_name(in.type) << "\"/>\n";
      }
      o << "      </bpmn:extensionElements>\n";
    }
    if (n.kind == NodeKind::ScriptTask) {
      std::string text = n.script_text;
      if (text.empty()) {
        for (const auto& s : n.script) text += to_source(s) + ";\n";
      }
      o << "      <bpmn:script>" << esc(text) << "</bpmn:script>\n";
    }
    o << "    </bpmn:" << tag << ">\n";
  }

  for (const auto& f : m.flows) {
    o << "    <bpmn:sequenceFlow id=\"" << esc(f.id) << "\" sourceRef=\"" << esc(f.source) << "\" targetRef=\""
      << esc(f.target) << "\"";
    if (!f.condition) {
      o << "/>\n";
      continue;
    }
    std::string text = f.condition_text.empty() ? to_source(*f.condition) : f.condition_text;
    o << ">\n      <bpmn:conditionExpression>" << esc(text) << "</bpmn:conditionExpression>\n"
      << "    </bpmn:sequenceFlow>\n";
  }

  bool ext = !m.variables.empty() || !m.interfaces.empty() || !m.invocations.empty() || !m.participants.empty();
  if (ext) {
    o << "    <bpmn:extensionElements>\n";
    for (const auto& p : m.participants) o << "      <bcext:participant name=\"" << esc(p) << "\"/>\n";
    if (!m.variables.empty()) {
      o << "      <bcext:variables>\n";
      for (const auto& v : m.variables) {
        o << "        <bcext:variable name=\"" << esc(v.name) << "\" type=\"" << type_name(v.type) << "\"";
        if (v.initial) o << " initial=\"" << esc(initial_text(*v.initial)) << "\"";
        o << "/>\n";
      }
      o << "      </bcext:variables>\n";
    }
    for (const auto& i : m.interfaces) {
      o << "      <bcext:smartContractInterface id=\"" << esc(i.id) << "\" name=\"" << esc(i.name) << "\"";
      if (i.contract_address) o << " contractAddress=\"" << i.contract_address->to_checksum() << "\"";
      o << ">\n";
      for (const auto& fn : i.functions) {
        o << "        <bcext:function name=\"" << esc(fn.name) << "\">\n";
        for (const auto& p : fn.inputs) {
          o << "          <bcext:input name=\"" << esc(p.name) << "\" type=\"" << type_name(p.type) << "\"/>\n";
        }
        for (const auto& p : fn.outputs) {
          o << "          <bcext:output name=\"" << esc(p.name) << "\" type=\"" << type_name(p.type) << "\"/>\n";
        }
        o << "        </bcext:function>\n";
      }
      o << "      </bcext:smartContractInterface>\n";
    }
    for (const auto& b : m.invocations) {
      o << "      <bcext:invocation id=\"" << esc(b.id) << "\" sourceTask=\"" << esc(b.source_task)
        << "\" targetInterface=\"" << esc(b.target_interface) << "\" fnName=\"" << esc(b.fn_name) << "\"";
      if (b.sender_is_caller) o << " sender=\"caller\"";
      o << ">\n";
      for (const auto& in : b.inputs) {
        o << "        <bcext:bindIn param=\"" << esc(in.param) << "\" source=\"" << esc(source_text(in.source))
          << "\"/>\n";
      }
      for (const auto& out : b.outputs) {
        o << "        <bcext:bindOut return=\"" << esc(out.output) << "\" target=\"" << esc(out.target) << "\"/>\n";
      }
      o << "      </bcext:invocation>\n";
    }
    o << "    </bpmn:extensionElements>\n";
  }
  o << "  </bpmn:process>\n</bpmn:definitions>\n";
  return o.str();
}

std::string dump_model(const ProcessModel& m) {
  std::ostringstream o;
  o << "process " << m.id << " '" << m.name << "'\n";
  for (const auto& n : m.nodes) {
    o << "node " << n.id << ' ' << node_kind_name(n.kind) << " '" << n.name << "'";
    for (const auto& in : n.inputs) o << ' ' << in.name << ':' << type_name(in.type);
    for (const auto& s : n.script) o << " {" << to_source(s) << '}';
    o << '\n';
  }
  for (const auto& f : m.flows) {
    o << "flow " << f.id << ' ' << f.source << "->" << f.target;
    if (f.condition) o << " [" << to_source(*f.condition) << ']';
    if (f.is_default) o << " default";
    o << '\n';
  }
  for (const auto& v : m.variables) {
    o << "var " << v.name << ':' << type_name(v.type);
    if (v.initial) o << " = " << type_name(v.initial->type()) << ' ' << v.initial->to_string();
    o << '\n';
  }
  for (const auto& i : m.interfaces) {
    o << "iface " << i.id << " '" << i.name << "' "
      << (i.contract_address ? i.contract_address->to_checksum() : std::string("unbound")) << '\n';
    for (const auto& fn : i.functions) {
      o << "  fn " << fn.name << '(';
      for (const auto& p : fn.inputs) o << p.name << ':' << type_name(p.type) << ' ';
      o << ")->(";
      for (const auto& p : fn.outputs) o << p.name << ':' << type_name(p.type) << ' ';
      o << ")\n";
    }
  }
  for (const auto& b : m.invocations) {
    o << "invoke " << b.id << ' ' << b.source_task << ' ' << b.target_interface << '.' << b.fn_name
      << (b.sender_is_caller ? " caller" : " process") << '\n';
    for (const auto& in : b.inputs) {
      o << "  in " << in.param << " <- " << static_cast<int>(in.source.kind) << ' ' << in.source.name;
      if (in.source.kind == BindingSource::Kind::Literal) {
        o << ' ' << type_name(in.source.literal.type()) << ' ' << in.source.literal.to_string();
      }
      o << '\n';
    }
    for (const auto& out : b.outputs) o << "  out " << out.output << " -> " << out.target << '\n';
  }
  for (const auto& p : m.participants) o << "participant " << p << '\n';
  return o.str();
}

}  // namespace testsupport
