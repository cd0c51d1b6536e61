#include "procforge/interpreter.hpp"

#include <algorithm>

namespace procforge {

void World::add(const Address& at, Registry registry) {
  if (cells_.contains(at)) throw std::invalid_argument("a registry already lives at " + at.to_checksum());
  cells_.emplace(at, std::make_unique<Cell>(std::move(registry)));
}

std::vector<Address> World::addresses() const {
  std::vector<Address> out;
  for (const auto& [a, c] : cells_) out.push_back(a);
  return out;
}

Registry& World::registry(const Address& at) {
  auto it = cells_.find(at);
  if (it == cells_.end()) throw std::out_of_range("no registry at " + at.to_checksum());
  return it->second->registry;
}

const Registry& World::registry(const Address& at) const {
  auto it = cells_.find(at);
  if (it == cells_.end()) throw std::out_of_range("no registry at " + at.to_checksum());
  return it->second->registry;
}

const FungibleLedger& World::ledger(const Address& at) const { return std::get<FungibleLedger>(registry(at)); }
const NonFungibleStore& World::store(const Address& at) const { return std::get<NonFungibleStore>(registry(at)); }

std::uint64_t World::next_instance_number() {
  std::lock_guard lock(counter_mutex_);
  return ++instances_;
}

std::string_view instance_status_name(InstanceStatus s) {
  switch (s) {
    case InstanceStatus::Running: return "Running";
    case InstanceStatus::Completed: return "Completed";
    case InstanceStatus::RunningWithRejections: return "RunningWithRejections";
  }
  return "?";
}

std::string_view instance_error_name(InstanceErrorKind k) {
  switch (k) {
    case InstanceErrorKind::MissingAddressBinding: return "MissingAddressBinding";
    case InstanceErrorKind::UnknownRegistryAddress: return "UnknownRegistryAddress";
    case InstanceErrorKind::InitialClosureFailed: return "InitialClosureFailed";
  }
  return "?";
}

/// Holds every registry the instance touches, in address order, together
/// with a copy of each taken on entry.
struct ProcessInstance::Locked {
  std::vector<std::unique_lock<std::mutex>> locks;
  std::vector<std::pair<Registry*, Registry>> saved;

  Locked(World& world, const std::vector<Address>& order) {
    for (const auto& a : order) {
      auto& cell = *world.cells_.at(a);
      locks.emplace_back(cell.mutex);
      saved.emplace_back(&cell.registry, cell.registry);
    }
  }

  void restore() {
    for (auto& [live, copy] : saved) *live = copy;
  }
};

ProcessInstance::ProcessInstance(const MarkingAutomaton& automaton, World& world, const AddressBindings& bindings)
    : automaton_(&automaton), world_(&world) {
  const ProcessModel& m = automaton.model();
  for (const auto& iface : m.interfaces) {
    Address at;
    if (iface.contract_address) {
      at = *iface.contract_address;
    } else {
      auto it = bindings.find(iface.id);
      if (it == bindings.end()) {
        throw InstanceError(InstanceErrorKind::MissingAddressBinding,
                            "interface '" + iface.name + "' has no contract address and no binding");
      }
      at = it->second;
    }
    if (!world.contains(at)) {
      throw InstanceError(InstanceErrorKind::UnknownRegistryAddress,
                          "interface '" + iface.name + "' is bound to " + at.to_checksum() + ", where no registry lives");
    }
    addresses_.emplace(iface.id, at);
    if (std::find(lock_order_.begin(), lock_order_.end(), at) == lock_order_.end()) lock_order_.push_back(at);
  }
  std::sort(lock_order_.begin(), lock_order_.end());

  process_address_ = Address::derive(m.id + "#" + std::to_string(world.next_instance_number()));

  Locked held(world, lock_order_);
  for (auto& [live, copy] : held.saved) {
    if (auto* store = std::get_if<NonFungibleStore>(live)) store->register_process(process_address_);
  }
  try {
    auto hook = [&](const Node& n, VarEnv& env) {
      if (n.kind == NodeKind::EndEvent) {
        end_event_ = n.id;
      } else {
        run_invocations(n, env, std::nullopt);
      }
    };
    std::tie(marking_, env_) = automaton.close_data(automaton.initial_marking(), automaton.initial_env(), hook);
  } catch (const std::exception& e) {
    held.restore();
    throw InstanceError(InstanceErrorKind::InitialClosureFailed, e.what());
  }
}

InstanceStatus ProcessInstance::status() const {
  if (marking_.none()) return InstanceStatus::Completed;
  return any_rejected_ ? InstanceStatus::RunningWithRejections : InstanceStatus::Running;
}

std::vector<TraceEvent> ProcessInstance::accepted_trace() const {
  std::vector<TraceEvent> out;
  for (const auto& e : log_) {
    if (e.accepted) out.push_back(e.event);
  }
  return out;
}

Value ProcessInstance::bound_input(const BindingSource& src, const VarEnv& env) const {
  switch (src.kind) {
    case BindingSource::Kind::ProcessAddress: return Value::address(process_address_);
    case BindingSource::Kind::Literal: return src.literal;
    case BindingSource::Kind::Variable:
    case BindingSource::Kind::TaskInput: break;
  }
  auto it = env.find(src.name);
  if (it == env.end()) throw RegistryError(RegistryErrorKind::BadArgument, "'" + src.name + "' has no value");
  return it->second;
}

void ProcessInstance::run_invocations(const Node& task, VarEnv& env, const std::optional<Address>& caller) {
  const ProcessModel& m = model();
  for (const InvocationBinding* inv : m.invocations_of(task.id)) {
    const InterfaceDecl* iface = m.find_interface(inv->target_interface);
    const FunctionDecl* fn = iface ? iface->find_function(inv->fn_name) : nullptr;
    if (!fn) throw RegistryError(RegistryErrorKind::UnknownFunction, "invocation of unknown function " + inv->fn_name);
    std::vector<Value> args;
    for (const auto& p : fn->inputs) {
      auto b = std::find_if(inv->inputs.begin(), inv->inputs.end(), [&](const InputBinding& ib) { return ib.param == p.name; });
      if (b == inv->inputs.end()) {
        throw RegistryError(RegistryErrorKind::BadArgument, inv->fn_name + " parameter '" + p.name + "' is unbound");
      }
      args.push_back(bound_input(b->source, env));
    }
    if (observer_) observer_(*inv);
    Address who = inv->sender_is_caller && caller ? *caller : process_address_;
    auto results = call_registry(world_->registry(addresses_.at(iface->id)), inv->fn_name, args, who);
    if (fn->outputs.size() > results.size()) {
      throw RegistryError(RegistryErrorKind::BadArgument, inv->fn_name + " returns " + std::to_string(results.size()) +
                                                              " values, the interface declares " +
                                                              std::to_string(fn->outputs.size()));
    }
    for (const auto& ob : inv->outputs) {
      auto pos = std::find_if(fn->outputs.begin(), fn->outputs.end(),
                              [&](const FunctionParameter& o) { return o.name == ob.output; });
      if (pos == fn->outputs.end()) {
        throw RegistryError(RegistryErrorKind::BadArgument, inv->fn_name + " has no output '" + ob.output + "'");
      }
      Value v = results[static_cast<std::size_t>(pos - fn->outputs.begin())];
      if (const VariableDecl* var = m.find_variable(ob.target)) {
        auto c = coerce(v, var->type);
        if (!c) {
          throw RegistryError(RegistryErrorKind::BadArgument,
                              "output '" + ob.output + "' does not fit variable '" + ob.target + "'");
        }
        v = std::move(*c);
      }
      env.insert_or_assign(ob.target, std::move(v));
    }
  }
}

InvokeResult ProcessInstance::invoke(const std::string& task, const VarEnv& args, std::optional<Address> caller) {
  LogEntry entry{TraceEvent{task, args, caller}, false, "", ""};
  auto reject = [&](std::string reason, std::string message) {
    entry.reason = std::move(reason);
    entry.message = std::move(message);
    any_rejected_ = true;
    log_.push_back(entry);
    return InvokeResult{false, entry.reason, entry.message};
  };

  const MarkingAutomaton& a = *automaton_;
  const ExternalTransition* t = a.find_external(task);
  if (!t) return reject("UnknownTask", "'" + task + "' is not an external task");

  Locked held(*world_, lock_order_);
  std::optional<std::string> end_event = end_event_;
  try {
    FireResult fired = a.fire_external(marking_, env_, task, args);
    run_invocations(*t->node, fired.env, caller);
    auto hook = [&](const Node& n, VarEnv& env) {
      if (n.kind == NodeKind::EndEvent) {
        end_event = n.id;
      } else {
        run_invocations(n, env, std::nullopt);
      }
    };
    auto [m, env] = a.close_data(fired.marking, std::move(fired.env), hook);
    marking_ = m;
    env_ = std::move(env);
    end_event_ = end_event;
  } catch (const AutomatonError& e) {
    held.restore();
    return reject(std::string(automaton_error_name(e.kind())), e.what());
  } catch (const RegistryError& e) {
    held.restore();
    return reject(std::string(registry_error_name(e.kind())), e.what());
  }
  entry.accepted = true;
  log_.push_back(entry);
  return InvokeResult{true, "", ""};
}

Address derived_registry_address(const ProcessModel& model, const InterfaceDecl& iface) {
  return Address::derive("registry#" + model.id + "#" + iface.id);
}

Deployment deploy_registries(const ProcessModel& model, const std::vector<RegistrySpec>& specs, World& world,
                             const Address& deployer) {
  Deployment out;
  for (const auto& iface : model.interfaces) {
    auto it = std::find_if(specs.begin(), specs.end(), [&](const RegistrySpec& s) { return contract_name(s) == iface.name; });
    if (it == specs.end()) continue;
    Address at = iface.contract_address ? *iface.contract_address : derived_registry_address(model, iface);
    if (!iface.contract_address) out.bindings.emplace(iface.id, at);
    out.backed.emplace(iface.id, static_cast<std::size_t>(it - specs.begin()));
    if (world.contains(at)) continue;
    if (const auto* f = std::get_if<FungibleRegistrySpec>(&*it)) {
      world.add(at, FungibleLedger(*f));
    } else {
      world.add(at, NonFungibleStore(std::get<NonFungibleRegistrySpec>(*it), deployer));
    }
  }
  return out;
}

}  // namespace procforge
