#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "procforge/automaton.hpp"
#include "procforge/ledger.hpp"
#include "procforge/registry.hpp"

namespace procforge {

/// Simulated chain state: registries by address. Add registries before
/// starting instances; afterwards the map is fixed and each registry is
/// guarded by its own mutex, so instances on different threads may share it.
class World {
 public:
  World() = default;
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  /// Throws std::invalid_argument if the address is taken.
  void add(const Address& at, Registry registry);
  [[nodiscard]] bool contains(const Address& at) const { return cells_.contains(at); }
  [[nodiscard]] std::vector<Address> addresses() const;

  /// Unsynchronized access, for setup and inspection between runs.
  [[nodiscard]] Registry& registry(const Address& at);
  [[nodiscard]] const Registry& registry(const Address& at) const;
  [[nodiscard]] const FungibleLedger& ledger(const Address& at) const;
  [[nodiscard]] const NonFungibleStore& store(const Address& at) const;

  /// Fresh instance number for deriving process addresses.
  std::uint64_t next_instance_number();

 private:
  friend class ProcessInstance;
  struct Cell {
    explicit Cell(Registry r) : registry(std::move(r)) {}
    std::mutex mutex;
    Registry registry;
  };
  std::map<Address, std::unique_ptr<Cell>> cells_;
  std::mutex counter_mutex_;
  std::uint64_t instances_ = 0;
};

/// One event of a trace, as read from a trace file or recorded in a log.
struct TraceEvent {
  std::string task;
  VarEnv args;
  std::optional<Address> caller;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct LogEntry {
  TraceEvent event;
  bool accepted = false;
  /// Short reason code such as `NotEnabled` or `InsufficientBalance`; empty when accepted.
  std::string reason;
  std::string message;
};

enum class InstanceStatus { Running, Completed, RunningWithRejections };

std::string_view instance_status_name(InstanceStatus s);

enum class InstanceErrorKind { MissingAddressBinding, UnknownRegistryAddress, InitialClosureFailed };

class InstanceError : public std::runtime_error {
 public:
  InstanceError(InstanceErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] InstanceErrorKind kind() const { return kind_; }

 private:
  InstanceErrorKind kind_;
};

std::string_view instance_error_name(InstanceErrorKind k);

/// interface id -> registry address, for interfaces without a fixed address.
using AddressBindings = std::map<std::string, Address, std::less<>>;

struct InvokeResult {
  bool accepted = false;
  std::string reason;
  std::string message;
};

/// A running process instance. Not thread-safe by itself; invocations on
/// one instance must be serialized by the caller.
class ProcessInstance {
 public:
  /// Called before every registry call; tests use it to inject faults.
  using CallObserver = std::function<void(const InvocationBinding&)>;

  /// Binds interfaces to registries, registers the new process address with
  /// every record registry it uses, and runs the initial closure.
  ProcessInstance(const MarkingAutomaton& automaton, World& world, const AddressBindings& bindings = {});

  InvokeResult invoke(const std::string& task, const VarEnv& args = {}, std::optional<Address> caller = {});
  InvokeResult invoke(const TraceEvent& e) { return invoke(e.task, e.args, e.caller); }

  [[nodiscard]] const MarkingAutomaton& automaton() const { return *automaton_; }
  [[nodiscard]] const ProcessModel& model() const { return automaton_->model(); }
  [[nodiscard]] const Marking& marking() const { return marking_; }
  [[nodiscard]] const VarEnv& env() const { return env_; }
  [[nodiscard]] const Address& process_address() const { return process_address_; }
  [[nodiscard]] const std::vector<LogEntry>& log() const { return log_; }
  [[nodiscard]] InstanceStatus status() const;
  /// Id of the last end event reached, once completed.
  [[nodiscard]] const std::optional<std::string>& end_event() const { return end_event_; }
  /// Address of each interface, by interface id.
  [[nodiscard]] const std::map<std::string, Address, std::less<>>& interface_addresses() const { return addresses_; }
  /// Accepted events only, in order.
  [[nodiscard]] std::vector<TraceEvent> accepted_trace() const;

  void set_call_observer(CallObserver observer) { observer_ = std::move(observer); }

 private:
  struct Locked;

  void run_invocations(const Node& task, VarEnv& env, const std::optional<Address>& caller);
  Value bound_input(const BindingSource& src, const VarEnv& env) const;

  const MarkingAutomaton* automaton_;
  World* world_;
  std::map<std::string, Address, std::less<>> addresses_;
  std::vector<Address> lock_order_;
  Address process_address_;
  Marking marking_;
  VarEnv env_;
  std::vector<LogEntry> log_;
  std::optional<std::string> end_event_;
  bool any_rejected_ = false;
  CallObserver observer_;
};

/// Registry deployment for a model: every interface whose name equals a
/// spec's contract name is backed by a fresh registry. Interfaces with a
/// fixed address deploy there; the others get a derived address, returned
/// as bindings. Interfaces without a matching spec are left out.
struct Deployment {
  AddressBindings bindings;
  /// interface id -> spec index, for the interfaces that were deployed.
  std::map<std::string, std::size_t, std::less<>> backed;
};

Deployment deploy_registries(const ProcessModel& model, const std::vector<RegistrySpec>& specs, World& world,
                             const Address& deployer);

/// Address a deployment uses for an interface that has no fixed address.
Address derived_registry_address(const ProcessModel& model, const InterfaceDecl& iface);

}  // namespace procforge
