#include "procforge/automaton.hpp"

#include <algorithm>
#include <sstream>

namespace procforge {

std::string_view automaton_error_name(AutomatonErrorKind k) {
  switch (k) {
    case AutomatonErrorKind::NotEnabled: return "NotEnabled";
    case AutomatonErrorKind::NoBranchTaken: return "NoBranchTaken";
    case AutomatonErrorKind::NonTerminatingClosure: return "NonTerminatingClosure";
    case AutomatonErrorKind::ScriptError: return "ScriptError";
    case AutomatonErrorKind::UnknownTask: return "UnknownTask";
    case AutomatonErrorKind::BadArgument: return "BadArgument";
    case AutomatonErrorKind::Internal: return "InternalInvariantError";
  }
  return "?";
}

std::size_t MarkingAutomaton::bit_of(std::string_view flow_id) const {
  auto it = bits_.find(flow_id);
  if (it == bits_.end()) throw AutomatonError(AutomatonErrorKind::Internal, "no bit for flow '" + std::string(flow_id) + "'");
  return it->second;
}

Marking MarkingAutomaton::outgoing_bits(std::string_view node_id) const {
  Marking m;
  for (const auto* f : model_->outgoing(node_id)) m.set(bit_of(f->id));
  return m;
}

const ExternalTransition* MarkingAutomaton::find_external(std::string_view name_or_id) const {
  for (const auto& t : externals_) {
    if (t.node->name == name_or_id) return &t;
  }
  for (const auto& t : externals_) {
    if (t.node->id == name_or_id) return &t;
  }
  return nullptr;
}

namespace {

bool is_unconditioned(const SequenceFlow& f) { return !f.condition || f.is_default; }

// Gateway that can be merged into the consuming task `task`.
const Node* pre_fold_gateway(const ProcessModel& model, const Node& task) {
  auto in = model.incoming(task.id);
  if (in.size() != 1 || !is_unconditioned(*in[0])) return nullptr;
  const Node* g = model.find_node(in[0]->source);
  if (!g || !is_gateway(g->kind)) return nullptr;
  if (model.outgoing(g->id).size() != 1 || model.incoming(g->id).empty()) return nullptr;
  return g;
}

// Parallel split that can be merged into the producing task `task`.
const Node* post_fold_gateway(const ProcessModel& model, const Node& task) {
  auto out = model.outgoing(task.id);
  if (out.size() != 1) return nullptr;
  const Node* g = model.find_node(out[0]->target);
  if (!g || g->kind != NodeKind::AndGateway) return nullptr;
  if (model.incoming(g->id).size() != 1 || model.outgoing(g->id).size() < 2) return nullptr;
  return g;
}

}  // namespace

MarkingAutomaton compile_marking(const ProcessModel& model) {
  MarkingAutomaton a;
  a.model_ = &model;
  if (model.flows.size() > kMarkingBits) {
    throw AutomatonError(AutomatonErrorKind::Internal, "more than 256 sequence flows");
  }
  for (std::size_t i = 0; i < model.flows.size(); ++i) {
    a.flow_ids_.push_back(model.flows[i].id);
    if (!a.bits_.emplace(model.flows[i].id, i).second) {
      throw AutomatonError(AutomatonErrorKind::Internal, "duplicate flow id '" + model.flows[i].id + "'");
    }
  }

  auto incoming_bits = [&](const Node& n) {
    std::vector<Marking> alts;
    for (const auto* f : model.incoming(n.id)) alts.push_back(Marking::single(a.bit_of(f->id)));
    return alts;
  };
  auto join_alternatives = [&](const Node& g) {
    auto alts = incoming_bits(g);
    if (g.kind == NodeKind::AndGateway) {
      Marking all;
      for (const auto& m : alts) all |= m;
      alts = {all};
    }
    return alts;
  };

  std::set<std::string> folded;
  for (const auto& n : model.nodes) {
    if (!is_task(n.kind)) continue;
    if (const Node* g = pre_fold_gateway(model, n)) folded.insert(g->id);
    if (const Node* g = post_fold_gateway(model, n)) folded.insert(g->id);
  }

  for (const auto& n : model.nodes) {
    if (n.kind == NodeKind::StartEvent) {
      a.initial_ |= a.outgoing_bits(n.id);
      continue;
    }
    if (folded.contains(n.id)) {
      a.folded_.push_back(n.id);
      continue;
    }
    if (is_task(n.kind)) {
      std::vector<Marking> pres;
      if (const Node* g = pre_fold_gateway(model, n)) pres = join_alternatives(*g);
      else pres = incoming_bits(n);
      Marking post;
      if (const Node* g = post_fold_gateway(model, n)) post = a.outgoing_bits(g->id);
      else post = a.outgoing_bits(n.id);

      if (is_external(n.kind)) {
        ExternalTransition t;
        t.node = &n;
        for (const auto& p : pres) t.alternatives.push_back({p, post});
        a.externals_.push_back(std::move(t));
      } else {
        AutoTransition t;
        t.node = &n;
        t.pre = std::move(pres);
        t.post = post;
        a.autos_.push_back(std::move(t));
      }
      continue;
    }
    AutoTransition t;
    t.node = &n;
    if (n.kind == NodeKind::EndEvent) {
      t.pre = incoming_bits(n);
      for (const auto& p : t.pre) a.end_mask_ |= p;
    } else {
      t.pre = join_alternatives(n);
      auto out = model.outgoing(n.id);
      bool exclusive = n.kind == NodeKind::XorGateway &&
                       (out.size() > 1 || std::any_of(out.begin(), out.end(),
                                                      [](const SequenceFlow* f) { return !is_unconditioned(*f); }));
      if (exclusive) {
        for (const auto* f : out) {
          Branch b;
          b.post = Marking::single(a.bit_of(f->id));
          b.is_default = f->is_default;
          if (!f->is_default) b.guard = f->condition;
          b.flow_id = f->id;
          t.branches.push_back(std::move(b));
        }
      } else {
        t.post = a.outgoing_bits(n.id);
      }
    }
    a.autos_.push_back(std::move(t));
  }
  return a;
}

namespace {

// Lowest enabled alternative of the first enabled transition, in order.
std::optional<std::pair<std::size_t, std::size_t>> first_enabled(const std::vector<AutoTransition>& autos,
                                                                 const Marking& m) {
  for (std::size_t i = 0; i < autos.size(); ++i) {
    for (std::size_t k = 0; k < autos[i].pre.size(); ++k) {
      if (m.contains(autos[i].pre[k])) return std::pair{i, k};
    }
  }
  return std::nullopt;
}

}  // namespace

std::pair<Marking, VarEnv> MarkingAutomaton::close_data(Marking m, VarEnv env, const ScriptHook& hook) const {
  const std::size_t budget = 4 * flow_count();
  std::size_t fired = 0;
  while (auto next = first_enabled(autos_, m)) {
    const AutoTransition& t = autos_[next->first];
    if (++fired > budget) {
      throw AutomatonError(AutomatonErrorKind::NonTerminatingClosure,
                           "closure exceeded " + std::to_string(budget) + " automatic firings at '" + t.node->id + "'");
    }
    Marking consumed = m & ~t.pre[next->second];
    if (!t.exclusive()) {
      if (t.node->kind == NodeKind::ScriptTask) {
        try {
          for (const auto& st : t.node->script) exec_statement(st, env);
        } catch (const EvalError& e) {
          throw AutomatonError(AutomatonErrorKind::ScriptError,
                               "script task '" + label_of(*t.node) + "': " + std::string(eval_error_name(e.kind())) +
                                   ": " + e.what());
        }
        if (hook) hook(*t.node, env);
      } else if (hook && t.node->kind == NodeKind::EndEvent) {
        hook(*t.node, env);
      }
      m = consumed | t.post;
      continue;
    }
    const Branch* taken = nullptr;
    const Branch* fallback = nullptr;
    for (const auto& b : t.branches) {
      if (b.is_default) {
        if (!fallback) fallback = &b;
        continue;
      }
      bool ok = true;
      if (b.guard) {
        try {
          ok = eval_expr(*b.guard, env).as_bool();
        } catch (const EvalError& e) {
          throw AutomatonError(AutomatonErrorKind::ScriptError, "condition on '" + b.flow_id +
                                                                    "': " + std::string(eval_error_name(e.kind())) +
                                                                    ": " + e.what());
        }
      }
      if (ok) {
        taken = &b;
        break;
      }
    }
    if (!taken) taken = fallback;
    if (!taken) {
      throw AutomatonError(AutomatonErrorKind::NoBranchTaken,
                           "no condition holds at '" + label_of(*t.node) + "' and it has no default flow");
    }
    m = consumed | taken->post;
  }
  return {m, std::move(env)};
}

std::set<Marking> MarkingAutomaton::close_nondeterministic(const Marking& start) const {
  std::set<Marking> outcomes;
  std::set<Marking> seen{start};
  std::vector<Marking> stack{start};
  while (!stack.empty()) {
    Marking m = stack.back();
    stack.pop_back();
    auto next = first_enabled(autos_, m);
    if (!next) {
      outcomes.insert(m);
      continue;
    }
    const AutoTransition& t = autos_[next->first];
    Marking consumed = m & ~t.pre[next->second];
    auto push = [&](const Marking& s) {
      if (seen.insert(s).second) stack.push_back(s);
    };
    if (t.exclusive()) {
      for (const auto& b : t.branches) push(consumed | b.post);
    } else {
      push(consumed | t.post);
    }
  }
  if (outcomes.empty()) {
    throw AutomatonError(AutomatonErrorKind::NonTerminatingClosure, "automatic transitions cycle without a quiescent marking");
  }
  return outcomes;
}

std::vector<std::pair<Marking, VarEnv>> MarkingAutomaton::eager_closure(const Marking& m, const VarEnv& env,
                                                                         ClosureMode mode) const {
  if (mode == ClosureMode::Data) return {close_data(m, env)};
  std::vector<std::pair<Marking, VarEnv>> out;
  for (const auto& r : close_nondeterministic(m)) out.emplace_back(r, env);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> MarkingAutomaton::enabled_external(const Marking& m) const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < externals_.size(); ++i) {
    for (std::size_t k = 0; k < externals_[i].alternatives.size(); ++k) {
      if (m.contains(externals_[i].alternatives[k].pre)) out.emplace_back(i, k);
    }
  }
  return out;
}

std::vector<std::string> MarkingAutomaton::enabled_labels(const Marking& m) const {
  std::vector<std::string> out;
  for (const auto& [i, k] : enabled_external(m)) {
    const std::string& l = label_of(*externals_[i].node);
    if (out.empty() || out.back() != l) out.push_back(l);
  }
  return out;
}

FireResult MarkingAutomaton::fire_external(const Marking& m, const VarEnv& env, std::string_view task,
                                           const VarEnv& args) const {
  const ExternalTransition* t = find_external(task);
  if (!t) throw AutomatonError(AutomatonErrorKind::UnknownTask, "'" + std::string(task) + "' is not an external task");
  for (std::size_t k = 0; k < t->alternatives.size(); ++k) {
    const Alternative& alt = t->alternatives[k];
    if (!m.contains(alt.pre)) continue;
    FireResult r{(m & ~alt.pre) | alt.post, env, k};
    for (const auto& [name, value] : args) {
      auto in = std::find_if(t->node->inputs.begin(), t->node->inputs.end(),
                             [&](const TaskInput& ti) { return ti.name == name; });
      if (in == t->node->inputs.end()) {
        throw AutomatonError(AutomatonErrorKind::BadArgument,
                             "'" + label_of(*t->node) + "' has no input named '" + name + "'");
      }
      auto v = coerce(value, in->type);
      if (!v) {
        throw AutomatonError(AutomatonErrorKind::BadArgument, "argument '" + name + "' = " + value.to_string() +
                                                                  " is not a " + std::string(type_name(in->type)));
      }
      r.env.insert_or_assign(name, *v);
    }
    return r;
  }
  throw AutomatonError(AutomatonErrorKind::NotEnabled, "'" + label_of(*t->node) + "' is not enabled");
}

VarEnv MarkingAutomaton::initial_env() const {
  VarEnv env;
  for (const auto& v : model_->variables) env.insert_or_assign(v.name, v.initial ? *v.initial : Value::zero(v.type));
  return env;
}

std::string MarkingAutomaton::dump() const {
  std::ostringstream os;
  os << "process " << model_->id << "\n";
  os << "flows " << flow_count() << "\n";
  for (std::size_t i = 0; i < flow_ids_.size(); ++i) {
    const SequenceFlow* f = model_->find_flow(flow_ids_[i]);
    os << "  bit " << i << "  " << f->id << "  " << f->source << " -> " << f->target << "\n";
  }
  os << "initial " << initial_.to_hex() << "\n";
  os << "external\n";
  for (const auto& t : externals_) {
    os << "  " << label_of(*t.node) << " [" << node_kind_name(t.node->kind) << " " << t.node->id << "]\n";
    for (std::size_t k = 0; k < t.alternatives.size(); ++k) {
      os << "    alt " << k << "  pre " << t.alternatives[k].pre.to_hex() << "  post "
         << t.alternatives[k].post.to_hex() << "\n";
    }
  }
  os << "auto\n";
  for (const auto& t : autos_) {
    os << "  " << label_of(*t.node) << " [" << node_kind_name(t.node->kind) << " " << t.node->id << "]\n";
    for (std::size_t k = 0; k < t.pre.size(); ++k) os << "    alt " << k << "  pre " << t.pre[k].to_hex() << "\n";
    if (t.exclusive()) {
      for (const auto& b : t.branches) {
        os << "    branch " << b.flow_id << "  ";
        if (b.is_default) os << "default";
        else if (b.guard) os << "when " << to_source(*b.guard);
        else os << "always";
        os << "  post " << b.post.to_hex() << "\n";
      }
    } else {
      os << "    post " << t.post.to_hex() << "\n";
    }
  }
  os << "end mask " << end_mask_.to_hex() << "\n";
  if (!folded_.empty()) {
    os << "folded";
    for (const auto& g : folded_) os << " " << g;
    os << "\n";
  }
  return os.str();
}

}  // namespace procforge
