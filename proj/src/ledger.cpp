#include "procforge/ledger.hpp"

#include <algorithm>

namespace procforge {

std::string_view registry_error_name(RegistryErrorKind k) {
  switch (k) {
    case RegistryErrorKind::InsufficientBalance: return "InsufficientBalance";
    case RegistryErrorKind::InsufficientAllowance: return "InsufficientAllowance";
    case RegistryErrorKind::Unauthorized: return "Unauthorized";
    case RegistryErrorKind::FeatureDisabled: return "FeatureDisabled";
    case RegistryErrorKind::InvalidRecipient: return "InvalidRecipient";
    case RegistryErrorKind::Overflow: return "Overflow";
    case RegistryErrorKind::DuplicateRecord: return "DuplicateRecord";
    case RegistryErrorKind::UnknownRecord: return "UnknownRecord";
    case RegistryErrorKind::TransferDisabled: return "TransferDisabled";
    case RegistryErrorKind::AttributeNotUpdatable: return "AttributeNotUpdatable";
    case RegistryErrorKind::BadArgument: return "BadArgument";
    case RegistryErrorKind::UnknownFunction: return "UnknownFunction";
  }
  return "?";
}

RegistryError::RegistryError(RegistryErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(registry_error_name(kind)) + ": " + message), kind_(kind) {}

namespace {

[[noreturn]] void fail(RegistryErrorKind kind, const std::string& msg) { throw RegistryError(kind, msg); }

void check_amount(const BigInt& v) {
  if (v < 0 || v > uint256_max()) fail(RegistryErrorKind::BadArgument, "amount outside uint256: " + v.str());
}

bool contains(const std::vector<Address>& list, const Address& a) {
  return std::find(list.begin(), list.end(), a) != list.end();
}

}  // namespace

FungibleLedger::FungibleLedger(FungibleRegistrySpec spec) : spec_(std::move(spec)) {
  for (const auto& a : spec_.initially_distributed_accounts) {
    if (a.amount != 0) balances_[a.account] += a.amount;
  }
  total_supply_ = sum_of_balances();
}

BigInt FungibleLedger::balance_of(const Address& owner) const {
  auto it = balances_.find(owner);
  return it == balances_.end() ? BigInt(0) : it->second;
}

BigInt FungibleLedger::allowance(const Address& owner, const Address& spender) const {
  auto it = allowances_.find({owner, spender});
  return it == allowances_.end() ? BigInt(0) : it->second;
}

BigInt FungibleLedger::sum_of_balances() const {
  BigInt sum = 0;
  for (const auto& [a, b] : balances_) sum += b;
  return sum;
}

void FungibleLedger::move(const Address& from, const Address& to, const BigInt& amount) {
  check_amount(amount);
  if (to.is_zero()) fail(RegistryErrorKind::InvalidRecipient, "transfer to the zero address");
  BigInt have = balance_of(from);
  if (have < amount) {
    fail(RegistryErrorKind::InsufficientBalance,
         from.to_checksum() + " holds " + have.str() + ", needs " + amount.str());
  }
  if (amount == 0) return;
  if (have == amount) {
    balances_.erase(from);
  } else {
    balances_[from] = have - amount;
  }
  balances_[to] += amount;
}

void FungibleLedger::transfer(const Address& caller, const Address& to, const BigInt& amount) {
  move(caller, to, amount);
}

void FungibleLedger::approve(const Address& caller, const Address& spender, const BigInt& amount) {
  check_amount(amount);
  if (spender.is_zero()) fail(RegistryErrorKind::InvalidRecipient, "approve for the zero address");
  if (amount == 0) {
    allowances_.erase({caller, spender});
  } else {
    allowances_[{caller, spender}] = amount;
  }
}

void FungibleLedger::transfer_from(const Address& caller, const Address& from, const Address& to,
                                   const BigInt& amount) {
  check_amount(amount);
  BigInt allowed = allowance(from, caller);
  if (allowed < amount) {
    fail(RegistryErrorKind::InsufficientAllowance,
         caller.to_checksum() + " may spend " + allowed.str() + " of " + from.to_checksum());
  }
  move(from, to, amount);
  if (allowed == amount) {
    allowances_.erase({from, caller});
  } else {
    allowances_[{from, caller}] = allowed - amount;
  }
}

void FungibleLedger::mint(const Address& caller, const Address& to, const BigInt& amount) {
  check_amount(amount);
  if (!spec_.is_mintable) fail(RegistryErrorKind::FeatureDisabled, spec_.name + " is not mintable");
  if (!contains(spec_.minter_addresses, caller)) {
    fail(RegistryErrorKind::Unauthorized, caller.to_checksum() + " is not a minter");
  }
  if (to.is_zero()) fail(RegistryErrorKind::InvalidRecipient, "mint to the zero address");
  if (total_supply_ + amount > uint256_max()) fail(RegistryErrorKind::Overflow, "total supply would exceed uint256");
  if (amount == 0) return;
  balances_[to] += amount;
  total_supply_ += amount;
}

void FungibleLedger::burn(const Address& caller, const BigInt& amount) {
  check_amount(amount);
  if (!spec_.is_burnable) fail(RegistryErrorKind::FeatureDisabled, spec_.name + " is not burnable");
  if (!contains(spec_.burner_addresses, caller)) {
    fail(RegistryErrorKind::Unauthorized, caller.to_checksum() + " is not a burner");
  }
  BigInt have = balance_of(caller);
  if (have < amount) fail(RegistryErrorKind::InsufficientBalance, "cannot burn " + amount.str() + " of " + have.str());
  if (amount == 0) return;
  if (have == amount) {
    balances_.erase(caller);
  } else {
    balances_[caller] = have - amount;
  }
  total_supply_ -= amount;
}

NonFungibleStore::NonFungibleStore(NonFungibleRegistrySpec spec, Address deployer)
    : spec_(std::move(spec)), deployer_(deployer) {}

void NonFungibleStore::register_process(const Address& process) { processes_.insert(process); }
void NonFungibleStore::authorize(const Address& account) { authorized_.insert(account); }

const Record& NonFungibleStore::find(const Address& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) fail(RegistryErrorKind::UnknownRecord, "no record " + id.to_checksum());
  return it->second;
}

Record& NonFungibleStore::find(const Address& id) {
  return const_cast<Record&>(static_cast<const NonFungibleStore*>(this)->find(id));
}

void NonFungibleStore::check_function_access(const Address& caller) const {
  if (!spec_.is_registry_function_access_control_enabled) return;
  if (caller == deployer_ || processes_.contains(caller) || authorized_.contains(caller)) return;
  fail(RegistryErrorKind::Unauthorized, caller.to_checksum() + " may not call " + spec_.name);
}

bool NonFungibleStore::record_actor(const Record& r, const Address& caller) const {
  if (caller == r.owner) return true;
  return spec_.is_registry_record_access_control_enabled && caller == deployer_;
}

void NonFungibleStore::change_owner(Record& r, const Address& to) {
  if (to.is_zero()) fail(RegistryErrorKind::InvalidRecipient, "transfer to the zero address");
  r.owner = to;
  r.approved = Address();
}

void NonFungibleStore::record_create(const Address& id, const Address& owner, std::vector<Value> attrs,
                                     const Address& caller) {
  check_function_access(caller);
  if (spec_.is_record_creation_restricted_to_bpmn && !processes_.contains(caller)) {
    fail(RegistryErrorKind::Unauthorized, "only a registered process may create " + spec_.name + " records");
  }
  if (id.is_zero()) fail(RegistryErrorKind::BadArgument, "record id must not be the zero address");
  if (owner.is_zero()) fail(RegistryErrorKind::InvalidRecipient, "record owner must not be the zero address");
  if (records_.contains(id)) fail(RegistryErrorKind::DuplicateRecord, "record " + id.to_checksum() + " exists");
  if (attrs.size() != spec_.attributes.size()) {
    fail(RegistryErrorKind::BadArgument, "expected " + std::to_string(spec_.attributes.size()) + " attributes, got " +
                                             std::to_string(attrs.size()));
  }
  Record r;
  r.owner = owner;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const auto& decl = spec_.attributes[i];
    auto v = coerce(attrs[i], decl.type);
    if (!v) fail(RegistryErrorKind::BadArgument, "attribute " + decl.name + " expects " + std::string(type_name(decl.type)));
    if (decl.history_tracked) r.history.push_back({decl.name, *v});
    r.attrs.push_back(std::move(*v));
  }
  records_.emplace(id, std::move(r));
}

Address NonFungibleStore::record_get_owner(const Address& id) const { return find(id).owner; }
std::vector<Value> NonFungibleStore::record_get_attrs(const Address& id) const { return find(id).attrs; }
const std::vector<AttributeChange>& NonFungibleStore::record_history(const Address& id) const {
  return find(id).history;
}

void NonFungibleStore::record_update(const Address& id, std::string_view attribute, const Value& value,
                                     const Address& caller) {
  check_function_access(caller);
  auto it = std::find_if(spec_.attributes.begin(), spec_.attributes.end(),
                         [&](const AttributeDecl& a) { return a.name == attribute; });
  if (it == spec_.attributes.end()) fail(RegistryErrorKind::BadArgument, "no attribute " + std::string(attribute));
  if (!it->updatable) fail(RegistryErrorKind::AttributeNotUpdatable, std::string(attribute) + " is not updatable");
  Record& r = find(id);
  bool allowed = spec_.is_record_creation_restricted_to_bpmn ? processes_.contains(caller) : record_actor(r, caller);
  if (!allowed) fail(RegistryErrorKind::Unauthorized, caller.to_checksum() + " may not update " + id.to_checksum());
  auto v = coerce(value, it->type);
  if (!v) fail(RegistryErrorKind::BadArgument, std::string(attribute) + " expects " + std::string(type_name(it->type)));
  std::size_t index = static_cast<std::size_t>(it - spec_.attributes.begin());
  if (it->history_tracked) r.history.push_back({it->name, *v});
  r.attrs[index] = std::move(*v);
}

void NonFungibleStore::record_ownership_transfer(const Address& id, const Address& new_owner, const Address& caller) {
  check_function_access(caller);
  if (!spec_.is_ownership_transfer_enabled) fail(RegistryErrorKind::TransferDisabled, spec_.name + " records are fixed");
  Record& r = find(id);
  bool allowed =
      spec_.is_ownership_transfer_enabled_to_bpmn ? processes_.contains(caller) : record_actor(r, caller);
  if (!allowed) fail(RegistryErrorKind::Unauthorized, caller.to_checksum() + " may not transfer " + id.to_checksum());
  change_owner(r, new_owner);
}

BigInt NonFungibleStore::token_id(const Address& record_id) {
  BigInt v = 0;
  for (auto b : record_id.bytes()) v = (v << 8) | b;
  return v;
}

Address NonFungibleStore::record_id(const BigInt& token_id) {
  if (token_id < 0 || token_id >= (BigInt(1) << 160)) fail(RegistryErrorKind::UnknownRecord, "token id out of range");
  std::array<std::uint8_t, 20> bytes{};
  BigInt v = token_id;
  for (int i = 19; i >= 0; --i) {
    bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(static_cast<unsigned>(v & 0xff));
    v >>= 8;
  }
  return Address(bytes);
}

BigInt NonFungibleStore::balance_of(const Address& owner) const {
  if (owner.is_zero()) fail(RegistryErrorKind::BadArgument, "balance of the zero address");
  BigInt n = 0;
  for (const auto& [id, r] : records_) {
    if (r.owner == owner) ++n;
  }
  return n;
}

Address NonFungibleStore::owner_of(const BigInt& token) const { return find(record_id(token)).owner; }

void NonFungibleStore::approve(const Address& caller, const Address& approved, const BigInt& token) {
  Record& r = find(record_id(token));
  if (caller != r.owner && !operators_.contains({r.owner, caller})) {
    fail(RegistryErrorKind::Unauthorized, caller.to_checksum() + " may not approve for this record");
  }
  r.approved = approved;
}

Address NonFungibleStore::get_approved(const BigInt& token) const { return find(record_id(token)).approved; }

void NonFungibleStore::set_approval_for_all(const Address& caller, const Address& op, bool approved) {
  if (approved) {
    operators_.insert({caller, op});
  } else {
    operators_.erase({caller, op});
  }
}

bool NonFungibleStore::is_approved_for_all(const Address& owner, const Address& op) const {
  return operators_.contains({owner, op});
}

void NonFungibleStore::transfer_from(const Address& caller, const Address& from, const Address& to,
                                     const BigInt& token) {
  check_function_access(caller);
  if (!spec_.is_ownership_transfer_enabled) fail(RegistryErrorKind::TransferDisabled, spec_.name + " records are fixed");
  Record& r = find(record_id(token));
  if (r.owner != from) fail(RegistryErrorKind::BadArgument, "from is not the record owner");
  bool allowed = spec_.is_ownership_transfer_enabled_to_bpmn
                     ? processes_.contains(caller)
                     : caller == r.owner || caller == r.approved || operators_.contains({r.owner, caller});
  if (!allowed) fail(RegistryErrorKind::Unauthorized, caller.to_checksum() + " may not transfer this record");
  change_owner(r, to);
}

std::map<std::string, FunctionShape> registry_functions(const Registry& registry) {
  using T = Type;
  std::map<std::string, FunctionShape> out;
  if (const auto* l = std::get_if<FungibleLedger>(&registry)) {
    out["name"] = {{}, {T::String}};
    out["symbol"] = {{}, {T::String}};
    out["decimals"] = {{}, {T::Uint256}};
    out["totalSupply"] = {{}, {T::Uint256}};
    out["balanceOf"] = {{T::Address}, {T::Uint256}};
    out["allowance"] = {{T::Address, T::Address}, {T::Uint256}};
    out["transfer"] = {{T::Address, T::Uint256}, {T::Bool}};
    out["approve"] = {{T::Address, T::Uint256}, {T::Bool}};
    out["transferFrom"] = {{T::Address, T::Address, T::Uint256}, {T::Bool}};
    if (l->spec().is_mintable) out["mint"] = {{T::Address, T::Uint256}, {T::Bool}};
    if (l->spec().is_burnable) out["burn"] = {{T::Uint256}, {T::Bool}};
    return out;
  }
  const auto& s = std::get<NonFungibleStore>(registry).spec();
  std::vector<Type> attr_types;
  for (const auto& a : s.attributes) attr_types.push_back(a.type);
  std::vector<Type> create = {T::Address};
  create.insert(create.end(), attr_types.begin(), attr_types.end());
  out["record_create"] = {create, {}};
  out["record_get_owner"] = {{T::Address}, {T::Address}};
  out["record_get_attrs"] = {{T::Address}, attr_types};
  for (const auto& a : s.attributes) {
    if (a.updatable) out["record_update_" + a.name] = {{T::Address, a.type}, {}};
  }
  if (s.is_ownership_transfer_enabled) out["record_ownership_transfer"] = {{T::Address, T::Address}, {}};
  out["balanceOf"] = {{T::Address}, {T::Uint256}};
  out["ownerOf"] = {{T::Uint256}, {T::Address}};
  out["approve"] = {{T::Address, T::Uint256}, {}};
  out["getApproved"] = {{T::Uint256}, {T::Address}};
  out["setApprovalForAll"] = {{T::Address, T::Bool}, {}};
  out["isApprovedForAll"] = {{T::Address, T::Address}, {T::Bool}};
  out["transferFrom"] = {{T::Address, T::Address, T::Uint256}, {}};
  return out;
}

std::vector<Value> call_registry(Registry& registry, std::string_view function, const std::vector<Value>& raw,
                                 const Address& caller) {
  auto shapes = registry_functions(registry);
  auto it = shapes.find(std::string(function));
  if (it == shapes.end()) fail(RegistryErrorKind::UnknownFunction, "registry has no function " + std::string(function));
  const auto& shape = it->second;
  if (raw.size() != shape.inputs.size()) {
    fail(RegistryErrorKind::BadArgument, std::string(function) + " takes " + std::to_string(shape.inputs.size()) +
                                             " arguments, got " + std::to_string(raw.size()));
  }
  std::vector<Value> a;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto v = coerce(raw[i], shape.inputs[i]);
    if (!v) {
      fail(RegistryErrorKind::BadArgument, std::string(function) + " argument " + std::to_string(i + 1) + " expects " +
                                               std::string(type_name(shape.inputs[i])) + ", got " +
                                               std::string(type_name(raw[i].type())));
    }
    a.push_back(std::move(*v));
  }
  const std::string fn(function);

  if (auto* l = std::get_if<FungibleLedger>(&registry)) {
    if (fn == "name") return {Value::string(l->spec().name)};
    if (fn == "symbol") return {Value::string(l->spec().symbol)};
    if (fn == "decimals") return {Value::uint256(l->spec().decimals)};
    if (fn == "totalSupply") return {Value::uint256(l->total_supply())};
    if (fn == "balanceOf") return {Value::uint256(l->balance_of(a[0].as_address()))};
    if (fn == "allowance") return {Value::uint256(l->allowance(a[0].as_address(), a[1].as_address()))};
    if (fn == "transfer") {
      l->transfer(caller, a[0].as_address(), a[1].as_int());
      return {Value::boolean(true)};
    }
    if (fn == "approve") {
      l->approve(caller, a[0].as_address(), a[1].as_int());
      return {Value::boolean(true)};
    }
    if (fn == "transferFrom") {
      l->transfer_from(caller, a[0].as_address(), a[1].as_address(), a[2].as_int());
      return {Value::boolean(true)};
    }
    if (fn == "mint") {
      l->mint(caller, a[0].as_address(), a[1].as_int());
      return {Value::boolean(true)};
    }
    if (fn == "burn") {
      l->burn(caller, a[0].as_int());
      return {Value::boolean(true)};
    }
  } else {
    auto& s = std::get<NonFungibleStore>(registry);
    if (fn == "record_create") {
      std::vector<Value> attrs(a.begin() + 1, a.end());
      s.record_create(a[0].as_address(), caller, std::move(attrs), caller);
      return {};
    }
    if (fn == "record_get_owner") return {Value::address(s.record_get_owner(a[0].as_address()))};
    if (fn == "record_get_attrs") return s.record_get_attrs(a[0].as_address());
    if (fn.starts_with("record_update_")) {
      s.record_update(a[0].as_address(), fn.substr(14), a[1], caller);
      return {};
    }
    if (fn == "record_ownership_transfer") {
      s.record_ownership_transfer(a[0].as_address(), a[1].as_address(), caller);
      return {};
    }
    if (fn == "balanceOf") return {Value::uint256(s.balance_of(a[0].as_address()))};
    if (fn == "ownerOf") return {Value::address(s.owner_of(a[0].as_int()))};
    if (fn == "approve") {
      s.approve(caller, a[0].as_address(), a[1].as_int());
      return {};
    }
    if (fn == "getApproved") return {Value::address(s.get_approved(a[0].as_int()))};
    if (fn == "setApprovalForAll") {
      s.set_approval_for_all(caller, a[0].as_address(), a[1].as_bool());
      return {};
    }
    if (fn == "isApprovedForAll") return {Value::boolean(s.is_approved_for_all(a[0].as_address(), a[1].as_address()))};
    if (fn == "transferFrom") {
      s.transfer_from(caller, a[0].as_address(), a[1].as_address(), a[2].as_int());
      return {};
    }
  }
  fail(RegistryErrorKind::UnknownFunction, "registry has no function " + fn);
}

}  // namespace procforge
