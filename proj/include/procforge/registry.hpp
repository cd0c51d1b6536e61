#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "procforge/address.hpp"
#include "procforge/value.hpp"

namespace procforge {

struct Allocation {
  Address account;
  BigInt amount;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// ERC-20 style registry description.
struct FungibleRegistrySpec {
  std::string name;
  std::string symbol;
  unsigned decimals = 0;
  bool is_mintable = false;
  std::vector<Address> minter_addresses;
  bool is_burnable = false;
  std::vector<Address> burner_addresses;
  BigInt total_supply;
  std::vector<Allocation> initially_distributed_accounts;

  friend bool operator==(const FungibleRegistrySpec&, const FungibleRegistrySpec&) = default;
};

enum class RegistryType { Single, Distributed };

struct AttributeDecl {
  std::string name;
  Type type = Type::Uint256;
  bool updatable = false;
  bool history_tracked = false;

  friend bool operator==(const AttributeDecl&, const AttributeDecl&) = default;
};

/// ERC-721 style record registry description.
struct NonFungibleRegistrySpec {
  std::string name;
  RegistryType registry_type = RegistryType::Single;
  std::vector<AttributeDecl> attributes;
  bool is_ownership_transfer_enabled = false;
  bool is_record_creation_restricted_to_bpmn = false;
  bool is_ownership_transfer_enabled_to_bpmn = false;
  bool is_registry_function_access_control_enabled = false;
  bool is_registry_record_access_control_enabled = false;
  bool is_access_control_by_smart_contract_enabled = false;

  [[nodiscard]] const AttributeDecl* attribute(std::string_view name) const;

  friend bool operator==(const NonFungibleRegistrySpec&, const NonFungibleRegistrySpec&) = default;
};

using RegistrySpec = std::variant<FungibleRegistrySpec, NonFungibleRegistrySpec>;

enum class SpecErrorKind {
  SpecSyntaxError,
  MissingField,
  InvariantViolation,
  MalformedAddress,
  UnknownAttributeType,
};

std::string_view spec_error_name(SpecErrorKind k);

class SpecError : public std::runtime_error {
 public:
  SpecError(SpecErrorKind kind, std::string path, const std::string& message);
  [[nodiscard]] SpecErrorKind kind() const { return kind_; }
  /// JSON-pointer-ish location such as `initiallyDistributedAccounts[2].amount`.
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  SpecErrorKind kind_;
  std::string path_;
};

FungibleRegistrySpec parse_fungible(std::string_view doc);
NonFungibleRegistrySpec parse_nonfungible(std::string_view doc);
/// Picks the kind by the presence of `registryType`.
RegistrySpec parse_registry(std::string_view doc);

/// Canonical form: every field present, amounts as decimal strings,
/// addresses checksummed, two-space indentation, trailing newline.
std::string write_fungible(const FungibleRegistrySpec& spec);
std::string write_nonfungible(const NonFungibleRegistrySpec& spec);
std::string write_registry(const RegistrySpec& spec);

/// Throws SpecError(InvariantViolation) on the first broken invariant.
void check_invariants(const FungibleRegistrySpec& spec);
void check_invariants(const NonFungibleRegistrySpec& spec);

/// Solidity contract name: `Lorikeet Coin` becomes `LorikeetCoin`; record
/// registries get a `Registry` suffix unless they already end with it.
std::string contract_name(const FungibleRegistrySpec& spec);
std::string contract_name(const NonFungibleRegistrySpec& spec);
std::string contract_name(const RegistrySpec& spec);
const std::string& registry_display_name(const RegistrySpec& spec);

}  // namespace procforge
