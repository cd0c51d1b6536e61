#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "procforge/address.hpp"
#include "procforge/registry.hpp"
#include "procforge/value.hpp"

namespace procforge {

enum class RegistryErrorKind {
  InsufficientBalance,
  InsufficientAllowance,
  Unauthorized,
  FeatureDisabled,
  InvalidRecipient,
  Overflow,
  DuplicateRecord,
  UnknownRecord,
  TransferDisabled,
  AttributeNotUpdatable,
  BadArgument,
  UnknownFunction,
};

std::string_view registry_error_name(RegistryErrorKind k);

class RegistryError : public std::runtime_error {
 public:
  RegistryError(RegistryErrorKind kind, const std::string& message);
  [[nodiscard]] RegistryErrorKind kind() const { return kind_; }

 private:
  RegistryErrorKind kind_;
};

/// Runtime ERC-20 ledger. Zero balances and allowances are not stored, so
/// two ledgers in the same logical state compare equal.
class FungibleLedger {
 public:
  explicit FungibleLedger(FungibleRegistrySpec spec);

  [[nodiscard]] const FungibleRegistrySpec& spec() const { return spec_; }
  [[nodiscard]] BigInt balance_of(const Address& owner) const;
  [[nodiscard]] BigInt allowance(const Address& owner, const Address& spender) const;
  [[nodiscard]] const BigInt& total_supply() const { return total_supply_; }
  [[nodiscard]] BigInt sum_of_balances() const;
  [[nodiscard]] const std::map<Address, BigInt>& balances() const { return balances_; }

  void transfer(const Address& caller, const Address& to, const BigInt& amount);
  void approve(const Address& caller, const Address& spender, const BigInt& amount);
  void transfer_from(const Address& caller, const Address& from, const Address& to, const BigInt& amount);
  void mint(const Address& caller, const Address& to, const BigInt& amount);
  void burn(const Address& caller, const BigInt& amount);

  friend bool operator==(const FungibleLedger&, const FungibleLedger&) = default;

 private:
  void move(const Address& from, const Address& to, const BigInt& amount);

  FungibleRegistrySpec spec_;
  std::map<Address, BigInt> balances_;
  std::map<std::pair<Address, Address>, BigInt> allowances_;
  BigInt total_supply_;
};

struct AttributeChange {
  std::string attribute;
  Value value;

  friend bool operator==(const AttributeChange&, const AttributeChange&) = default;
};

struct Record {
  Address owner;
  /// One value per declared attribute, declaration order.
  std::vector<Value> attrs;
  /// Append-only; only history-tracked attributes are logged.
  std::vector<AttributeChange> history;
  Address approved;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Runtime ERC-721 style record registry. Authorization:
/// - creation restricted to BPMN: only registered process addresses create or update;
/// - transfer to BPMN: only registered processes transfer ownership;
/// - otherwise the owner acts, plus the deployer when record access control is on;
/// - function access control additionally requires an authorized caller
///   (deployer, registered processes, and accounts passed to `authorize`).
class NonFungibleStore {
 public:
  NonFungibleStore(NonFungibleRegistrySpec spec, Address deployer);

  [[nodiscard]] const NonFungibleRegistrySpec& spec() const { return spec_; }
  [[nodiscard]] const Address& deployer() const { return deployer_; }
  [[nodiscard]] const std::map<Address, Record>& records() const { return records_; }

  void register_process(const Address& process);
  [[nodiscard]] bool is_process(const Address& a) const { return processes_.contains(a); }
  void authorize(const Address& account);

  void record_create(const Address& id, const Address& owner, std::vector<Value> attrs, const Address& caller);
  [[nodiscard]] Address record_get_owner(const Address& id) const;
  [[nodiscard]] std::vector<Value> record_get_attrs(const Address& id) const;
  [[nodiscard]] const std::vector<AttributeChange>& record_history(const Address& id) const;
  void record_update(const Address& id, std::string_view attribute, const Value& value, const Address& caller);
  void record_ownership_transfer(const Address& id, const Address& new_owner, const Address& caller);

  [[nodiscard]] BigInt balance_of(const Address& owner) const;
  [[nodiscard]] Address owner_of(const BigInt& token_id) const;
  void approve(const Address& caller, const Address& approved, const BigInt& token_id);
  [[nodiscard]] Address get_approved(const BigInt& token_id) const;
  void set_approval_for_all(const Address& caller, const Address& operator_, bool approved);
  [[nodiscard]] bool is_approved_for_all(const Address& owner, const Address& operator_) const;
  void transfer_from(const Address& caller, const Address& from, const Address& to, const BigInt& token_id);

  static BigInt token_id(const Address& record_id);
  static Address record_id(const BigInt& token_id);

  friend bool operator==(const NonFungibleStore&, const NonFungibleStore&) = default;

 private:
  const Record& find(const Address& id) const;
  Record& find(const Address& id);
  void check_function_access(const Address& caller) const;
  [[nodiscard]] bool record_actor(const Record& r, const Address& caller) const;
  void change_owner(Record& r, const Address& to);

  NonFungibleRegistrySpec spec_;
  Address deployer_;
  std::set<Address> processes_;
  std::set<Address> authorized_;
  std::map<Address, Record> records_;
  std::set<std::pair<Address, Address>> operators_;
};

using Registry = std::variant<FungibleLedger, NonFungibleStore>;

/// Calls a registry function by its Solidity name with positional
/// arguments, returning positional results. Arguments are coerced to the
/// function's parameter types; mismatches raise BadArgument.
std::vector<Value> call_registry(Registry& registry, std::string_view function, const std::vector<Value>& args,
                                 const Address& caller);

/// Solidity-level signature of every callable function, for dumps and checks:
/// name -> (parameter types, result types).
struct FunctionShape {
  std::vector<Type> inputs;
  std::vector<Type> outputs;
};
std::map<std::string, FunctionShape> registry_functions(const Registry& registry);

}  // namespace procforge
