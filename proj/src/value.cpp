#include "procforge/value.hpp"

namespace procforge {

std::string_view type_name(Type t) {
  switch (t) {
    case Type::Uint256: return "uint256";
    case Type::Int256: return "int256";
    case Type::Bool: return "bool";
    case Type::Address: return "address";
    case Type::String: return "string";
    case Type::IntLiteral: return "integer literal";
  }
  return "?";
}

std::optional<Type> parse_type(std::string_view name) {
  if (name == "uint256" || name == "uint") return Type::Uint256;
  if (name == "int256" || name == "int") return Type::Int256;
  if (name == "bool") return Type::Bool;
  if (name == "address") return Type::Address;
  if (name == "string") return Type::String;
  return std::nullopt;
}

bool is_integer(Type t) {
  return t == Type::Uint256 || t == Type::Int256 || t == Type::IntLiteral;
}

const BigInt& uint256_max() {
  static const BigInt v = (BigInt(1) << 256) - 1;
  return v;
}

const BigInt& int256_min() {
  static const BigInt v = -(BigInt(1) << 255);
  return v;
}

const BigInt& int256_max() {
  static const BigInt v = (BigInt(1) << 255) - 1;
  return v;
}

bool in_range(const BigInt& v, Type t) {
  switch (t) {
    case Type::Uint256: return v >= 0 && v <= uint256_max();
    case Type::Int256: return v >= int256_min() && v <= int256_max();
    case Type::IntLiteral: return v >= int256_min() && v <= uint256_max();
    default: return false;
  }
}

Value Value::zero(Type t) {
  switch (t) {
    case Type::Uint256: return uint256(0);
    case Type::Int256: return int256(0);
    case Type::IntLiteral: return literal(0);
    case Type::Bool: return boolean(false);
    case Type::Address: return address(Address{});
    case Type::String: return string("");
  }
  return boolean(false);
}

std::string Value::to_string() const {
  switch (type_) {
    case Type::Uint256:
    case Type::Int256:
    case Type::IntLiteral: return as_int().str();
    case Type::Bool: return as_bool() ? "true" : "false";
    case Type::Address: return as_address().to_checksum();
    case Type::String: {
      std::string out = "\"";
      for (char c : as_string()) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      return out + "\"";
    }
  }
  return {};
}

std::optional<Value> coerce(const Value& v, Type target) {
  if (v.type() == target) return v;
  if (v.type() == Type::IntLiteral && (target == Type::Uint256 || target == Type::Int256)) {
    if (!in_range(v.as_int(), target)) return std::nullopt;
    return target == Type::Uint256 ? Value::uint256(v.as_int()) : Value::int256(v.as_int());
  }
  return std::nullopt;
}

}  // namespace procforge
