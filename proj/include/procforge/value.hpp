#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "procforge/address.hpp"

namespace procforge {

using BigInt = boost::multiprecision::cpp_int;

/// Static types of the process expression language. `IntLiteral` is the
/// type of an untyped integer literal; it unifies with either integer type
/// and never appears on a declared variable.
enum class Type { Uint256, Int256, Bool, Address, String, IntLiteral };

std::string_view type_name(Type t);
std::optional<Type> parse_type(std::string_view name);
bool is_integer(Type t);

const BigInt& uint256_max();
const BigInt& int256_min();
const BigInt& int256_max();
bool in_range(const BigInt& v, Type t);

class Value {
 public:
  Value() : type_(Type::Bool), data_(false) {}

  static Value uint256(BigInt v) { return Value(Type::Uint256, std::move(v)); }
  static Value int256(BigInt v) { return Value(Type::Int256, std::move(v)); }
  static Value literal(BigInt v) { return Value(Type::IntLiteral, std::move(v)); }
  static Value boolean(bool b) { return Value(Type::Bool, b); }
  static Value address(Address a) { return Value(Type::Address, a); }
  static Value string(std::string s) { return Value(Type::String, std::move(s)); }

  /// Zero value of a declared type.
  static Value zero(Type t);

  [[nodiscard]] Type type() const { return type_; }
  [[nodiscard]] const BigInt& as_int() const { return std::get<BigInt>(data_); }
  [[nodiscard]] bool as_bool() const { return std::get<bool>(data_); }
  [[nodiscard]] const Address& as_address() const { return std::get<Address>(data_); }
  [[nodiscard]] const std::string& as_string() const { return std::get<std::string>(data_); }

  /// Human-readable rendering: decimal integers, `true`/`false`, checksum
  /// addresses, and double-quoted strings.
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  template <typename T>
  Value(Type t, T v) : type_(t), data_(std::move(v)) {}

  Type type_;
  std::variant<BigInt, bool, Address, std::string> data_;
};

/// Converts a value to a declared type. Integer literals adopt the target
/// integer type after a range check; everything else must match exactly.
std::optional<Value> coerce(const Value& v, Type target);

/// Ordered so that dumps and reports are deterministic.
using VarEnv = std::map<std::string, Value, std::less<>>;

}  // namespace procforge
