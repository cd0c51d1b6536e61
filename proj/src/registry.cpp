#include "procforge/registry.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

namespace procforge {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view spec_error_name(SpecErrorKind k) {
  switch (k) {
    case SpecErrorKind::SpecSyntaxError: return "SpecSyntaxError";
    case SpecErrorKind::MissingField: return "MissingField";
    case SpecErrorKind::InvariantViolation: return "InvariantViolation";
    case SpecErrorKind::MalformedAddress: return "MalformedAddress";
    case SpecErrorKind::UnknownAttributeType: return "UnknownAttributeType";
  }
  return "?";
}

SpecError::SpecError(SpecErrorKind kind, std::string path, const std::string& message)
    : std::runtime_error(std::string(spec_error_name(kind)) + (path.empty() ? "" : " at " + path) + ": " + message),
      kind_(kind),
      path_(std::move(path)) {}

const AttributeDecl* NonFungibleRegistrySpec::attribute(std::string_view n) const {
  for (const auto& a : attributes) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

namespace {

[[noreturn]] void fail(SpecErrorKind kind, const std::string& path, const std::string& msg) {
  throw SpecError(kind, path, msg);
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

/// Field reader that rejects unknown keys once all expected ones were taken.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(SpecErrorKind::SpecSyntaxError, path_, "expected a JSON object");
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& required(const std::string& key) {
    const json* v = optional(key);
    if (!v) fail(SpecErrorKind::MissingField, join_path(path_, key), "required field is missing");
    return *v;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(SpecErrorKind::SpecSyntaxError, join_path(path_, it.key()), "unknown field");
    }
  }

  [[nodiscard]] std::string at(const std::string& key) const { return join_path(path_, key); }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(SpecErrorKind::SpecSyntaxError, path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json* v, const std::string& path) {
  if (!v) return false;
  if (!v->is_boolean()) fail(SpecErrorKind::SpecSyntaxError, path, "expected true or false");
  return v->get<bool>();
}

BigInt as_amount(const json& v, const std::string& path) {
  std::string digits;
  if (v.is_number_unsigned()) {
    digits = std::to_string(v.get<std::uint64_t>());
  } else if (v.is_string()) {
    digits = v.get<std::string>();
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
      fail(SpecErrorKind::SpecSyntaxError, path, "expected a decimal amount, got \"" + digits + "\"");
    }
  } else {
    fail(SpecErrorKind::SpecSyntaxError, path, "expected a decimal string or a non-negative integer");
  }
  BigInt out(digits);
  if (out > uint256_max()) fail(SpecErrorKind::InvariantViolation, path, "amount exceeds uint256");
  return out;
}

Address as_address(const json& v, const std::string& path) {
  std::string s = as_string(v, path);
  auto a = Address::parse(s);
  if (!a) fail(SpecErrorKind::MalformedAddress, path, "\"" + s + "\" is not 0x followed by 40 hex digits");
  return *a;
}

std::vector<Address> as_address_list(const json* v, const std::string& path) {
  std::vector<Address> out;
  if (!v) return out;
  if (!v->is_array()) fail(SpecErrorKind::SpecSyntaxError, path, "expected an array of addresses");
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_address((*v)[i], index_path(path, i)));
  return out;
}

json parse_json(std::string_view doc) {
  try {
    return json::parse(doc);
  } catch (const json::parse_error& e) {
    fail(SpecErrorKind::SpecSyntaxError, "", e.what());
  }
}

void check_unique(const std::vector<Address>& list, const std::string& path) {
  std::set<Address> seen;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!seen.insert(list[i]).second) {
      fail(SpecErrorKind::InvariantViolation, index_path(path, i), "duplicate address " + list[i].to_checksum());
    }
  }
}

const std::set<std::string, std::less<>>& solidity_reserved() {
  static const std::set<std::string, std::less<>> words = {
      "address", "as",       "bool",     "break",   "bytes",    "constant", "constructor", "continue",
      "contract", "delete",  "do",       "else",    "emit",     "enum",     "event",       "external",
      "false",   "for",      "function", "if",      "import",   "int",      "int256",      "interface",
      "internal", "library", "mapping",  "memory",  "modifier", "new",      "payable",     "pragma",
      "private", "public",   "pure",     "return",  "returns",  "storage",  "string",      "struct",
      "this",    "true",     "uint",     "uint256", "using",    "var",      "view",        "while"};
  return words;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

std::string camel(std::string_view name) {
  std::string out;
  bool upper = true;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      out.push_back(upper ? static_cast<char>(std::toupper(c)) : static_cast<char>(c));
      upper = false;
    } else {
      upper = true;
    }
  }
  return out;
}

void check_name(const std::string& name) {
  std::string c = camel(name);
  if (c.empty() || !std::isalpha(static_cast<unsigned char>(c[0]))) {
    fail(SpecErrorKind::InvariantViolation, "name", "name must start with a letter to form a contract name");
  }
}

}  // namespace

void check_invariants(const FungibleRegistrySpec& s) {
  check_name(s.name);
  if (s.symbol.empty() || s.symbol.size() > 11) {
    fail(SpecErrorKind::InvariantViolation, "symbol", "symbol must be 1 to 11 characters");
  }
  if (s.decimals > 18) fail(SpecErrorKind::InvariantViolation, "decimals", "decimals must be between 0 and 18");
  if (s.is_mintable != !s.minter_addresses.empty()) {
    fail(SpecErrorKind::InvariantViolation, "minterAddresses",
         s.is_mintable ? "mintable registry needs at least one minter" : "minters listed but isMintable is false");
  }
  if (s.is_burnable != !s.burner_addresses.empty()) {
    fail(SpecErrorKind::InvariantViolation, "burnerAddresses",
         s.is_burnable ? "burnable registry needs at least one burner" : "burners listed but isBurnable is false");
  }
  check_unique(s.minter_addresses, "minterAddresses");
  check_unique(s.burner_addresses, "burnerAddresses");
  std::vector<Address> holders;
  BigInt sum = 0;
  for (const auto& a : s.initially_distributed_accounts) {
    holders.push_back(a.account);
    sum += a.amount;
  }
  check_unique(holders, "initiallyDistributedAccounts");
  if (s.total_supply > uint256_max()) fail(SpecErrorKind::InvariantViolation, "totalSupply", "exceeds uint256");
  if (sum != s.total_supply) {
    fail(SpecErrorKind::InvariantViolation, "initiallyDistributedAccounts",
         "distribution ≠ totalSupply (" + sum.str() + " vs " + s.total_supply.str() + ")");
  }
}

void check_invariants(const NonFungibleRegistrySpec& s) {
  check_name(s.name);
  if (s.attributes.empty()) fail(SpecErrorKind::InvariantViolation, "attributes", "at least one attribute is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < s.attributes.size(); ++i) {
    const auto& a = s.attributes[i];
    std::string path = index_path("attributes", i) + ".name";
    if (!is_identifier(a.name) || solidity_reserved().contains(a.name)) {
      fail(SpecErrorKind::InvariantViolation, path, "\"" + a.name + "\" is not a usable identifier");
    }
    if (!names.insert(a.name).second) fail(SpecErrorKind::InvariantViolation, path, "duplicate attribute " + a.name);
    if (a.type == Type::IntLiteral) fail(SpecErrorKind::UnknownAttributeType, path, "no literal-typed attributes");
  }
  if (s.is_ownership_transfer_enabled_to_bpmn && !s.is_ownership_transfer_enabled) {
    fail(SpecErrorKind::InvariantViolation, "isOwnershipTransferEnabledToBPMN",
         "requires isOwnershipTransferEnabled");
  }
  if (s.is_access_control_by_smart_contract_enabled && !s.is_registry_function_access_control_enabled &&
      !s.is_registry_record_access_control_enabled) {
    fail(SpecErrorKind::InvariantViolation, "isAccessControlBySmartContractEnabled",
         "requires function or record access control");
  }
}

FungibleRegistrySpec parse_fungible(std::string_view doc) {
  json root = parse_json(doc);
  Fields f(root, "");
  FungibleRegistrySpec s;
  s.name = as_string(f.required("name"), "name");
  s.symbol = as_string(f.required("symbol"), "symbol");
  const json& dec = f.required("decimals");
  if (!dec.is_number_integer()) fail(SpecErrorKind::SpecSyntaxError, "decimals", "expected an integer");
  if (dec.get<std::int64_t>() < 0 || dec.get<std::int64_t>() > 18) {
    fail(SpecErrorKind::InvariantViolation, "decimals", "decimals must be between 0 and 18");
  }
  s.decimals = static_cast<unsigned>(dec.get<std::int64_t>());
  s.is_mintable = as_bool(f.optional("isMintable"), "isMintable");
  s.minter_addresses = as_address_list(f.optional("minterAddresses"), "minterAddresses");
  s.is_burnable = as_bool(f.optional("isBurnable"), "isBurnable");
  s.burner_addresses = as_address_list(f.optional("burnerAddresses"), "burnerAddresses");
  s.total_supply = as_amount(f.required("totalSupply"), "totalSupply");
  const json& dist = f.required("initiallyDistributedAccounts");
  if (!dist.is_array()) fail(SpecErrorKind::SpecSyntaxError, "initiallyDistributedAccounts", "expected an array");
  for (std::size_t i = 0; i < dist.size(); ++i) {
    std::string path = index_path("initiallyDistributedAccounts", i);
    Fields e(dist[i], path);
    Allocation a;
    a.account = as_address(e.required("address"), e.at("address"));
    a.amount = as_amount(e.required("amount"), e.at("amount"));
    e.finish();
    s.initially_distributed_accounts.push_back(std::move(a));
  }
  f.finish();
  check_invariants(s);
  return s;
}

NonFungibleRegistrySpec parse_nonfungible(std::string_view doc) {
  json root = parse_json(doc);
  Fields f(root, "");
  NonFungibleRegistrySpec s;
  s.name = as_string(f.required("name"), "name");
  std::string rt = as_string(f.required("registryType"), "registryType");
  std::string lowered = rt;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lowered == "single") {
    s.registry_type = RegistryType::Single;
  } else if (lowered == "distributed") {
    s.registry_type = RegistryType::Distributed;
  } else {
    fail(SpecErrorKind::InvariantViolation, "registryType", "expected \"single\" or \"distributed\", got \"" + rt + "\"");
  }
  const json& attrs = f.required("attributes");
  if (!attrs.is_array()) fail(SpecErrorKind::SpecSyntaxError, "attributes", "expected an array");
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    std::string path = index_path("attributes", i);
    Fields e(attrs[i], path);
    AttributeDecl a;
    a.name = as_string(e.required("name"), e.at("name"));
    std::string tn = as_string(e.required("type"), e.at("type"));
    auto t = parse_type(tn);
    if (!t || *t == Type::IntLiteral) fail(SpecErrorKind::UnknownAttributeType, e.at("type"), "unknown type " + tn);
    a.type = *t;
    a.updatable = as_bool(e.optional("updatable"), e.at("updatable"));
    a.history_tracked = as_bool(e.optional("historyTracked"), e.at("historyTracked"));
    e.finish();
    s.attributes.push_back(std::move(a));
  }
  s.is_ownership_transfer_enabled = as_bool(f.optional("isOwnershipTransferEnabled"), "isOwnershipTransferEnabled");
  s.is_record_creation_restricted_to_bpmn =
      as_bool(f.optional("isRecordCreationRestrictedToBPMN"), "isRecordCreationRestrictedToBPMN");
  s.is_ownership_transfer_enabled_to_bpmn =
      as_bool(f.optional("isOwnershipTransferEnabledToBPMN"), "isOwnershipTransferEnabledToBPMN");
  s.is_registry_function_access_control_enabled =
      as_bool(f.optional("isRegistryFunctionAccessControlEnabled"), "isRegistryFunctionAccessControlEnabled");
  s.is_registry_record_access_control_enabled =
      as_bool(f.optional("isRegistryRecordAccessControlEnabled"), "isRegistryRecordAccessControlEnabled");
  s.is_access_control_by_smart_contract_enabled =
      as_bool(f.optional("isAccessControlBySmartContractEnabled"), "isAccessControlBySmartContractEnabled");
  f.finish();
  check_invariants(s);
  return s;
}

RegistrySpec parse_registry(std::string_view doc) {
  json root = parse_json(doc);
  if (root.is_object() && root.contains("registryType")) return parse_nonfungible(doc);
  return parse_fungible(doc);
}

std::string write_fungible(const FungibleRegistrySpec& s) {
  ordered_json o;
  o["name"] = s.name;
  o["symbol"] = s.symbol;
  o["decimals"] = s.decimals;
  o["isMintable"] = s.is_mintable;
  o["minterAddresses"] = ordered_json::array();
  for (const auto& a : s.minter_addresses) o["minterAddresses"].push_back(a.to_checksum());
  o["isBurnable"] = s.is_burnable;
  o["burnerAddresses"] = ordered_json::array();
  for (const auto& a : s.burner_addresses) o["burnerAddresses"].push_back(a.to_checksum());
  o["totalSupply"] = s.total_supply.str();
  o["initiallyDistributedAccounts"] = ordered_json::array();
  for (const auto& d : s.initially_distributed_accounts) {
    ordered_json e;
    e["address"] = d.account.to_checksum();
    e["amount"] = d.amount.str();
    o["initiallyDistributedAccounts"].push_back(std::move(e));
  }
  return o.dump(2) + "\n";
}

std::string write_nonfungible(const NonFungibleRegistrySpec& s) {
  ordered_json o;
  o["name"] = s.name;
  o["registryType"] = s.registry_type == RegistryType::Single ? "single" : "distributed";
  o["attributes"] = ordered_json::array();
  for (const auto& a : s.attributes) {
    ordered_json e;
    e["name"] = a.name;
    e["type"] = std::string(type_name(a.type));
    e["updatable"] = a.updatable;
    e["historyTracked"] = a.history_tracked;
    o["attributes"].push_back(std::move(e));
  }
  o["isOwnershipTransferEnabled"] = s.is_ownership_transfer_enabled;
  o["isRecordCreationRestrictedToBPMN"] = s.is_record_creation_restricted_to_bpmn;
  o["isOwnershipTransferEnabledToBPMN"] = s.is_ownership_transfer_enabled_to_bpmn;
  o["isRegistryFunctionAccessControlEnabled"] = s.is_registry_function_access_control_enabled;
  o["isRegistryRecordAccessControlEnabled"] = s.is_registry_record_access_control_enabled;
  o["isAccessControlBySmartContractEnabled"] = s.is_access_control_by_smart_contract_enabled;
  return o.dump(2) + "\n";
}

std::string write_registry(const RegistrySpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, FungibleRegistrySpec>) {
          return write_fungible(s);
        } else {
          return write_nonfungible(s);
        }
      },
      spec);
}

std::string contract_name(const FungibleRegistrySpec& spec) { return camel(spec.name); }

std::string contract_name(const NonFungibleRegistrySpec& spec) {
  std::string c = camel(spec.name);
  if (c.size() < 8 || c.compare(c.size() - 8, 8, "Registry") != 0) c += "Registry";
  return c;
}

std::string contract_name(const RegistrySpec& spec) {
  return std::visit([](const auto& s) { return contract_name(s); }, spec);
}

const std::string& registry_display_name(const RegistrySpec& spec) {
  return std::visit([](const auto& s) -> const std::string& { return s.name; }, spec);
}

}  // namespace procforge
