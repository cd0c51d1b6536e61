#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "procforge/value.hpp"

namespace procforge {

enum class UnaryOp { Not, Negate };
enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view op_symbol(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression tree shared by gateway conditions and script tasks.
struct Expr {
  enum class Kind { Literal, Variable, Unary, Binary };

  Kind kind = Kind::Literal;
  Value literal;
  std::string name;
  UnaryOp unary_op = UnaryOp::Not;
  BinaryOp binary_op = BinaryOp::Add;
  ExprPtr lhs;
  ExprPtr rhs;
  std::size_t offset = 0;

  static ExprPtr make_literal(Value v, std::size_t offset = 0);
  static ExprPtr make_variable(std::string name, std::size_t offset = 0);
  static ExprPtr make_unary(UnaryOp op, ExprPtr operand, std::size_t offset = 0);
  static ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, std::size_t offset = 0);
};

/// `target := value`
struct Statement {
  std::string target;
  ExprPtr value;
};

/// Canonical text form, fully parenthesised where precedence requires it.
std::string to_source(const Expr& e);
std::string to_source(const Statement& s);

/// Every variable name referenced by the expression, in first-use order.
std::vector<std::string> referenced_variables(const Expr& e);

class TypeError : public std::runtime_error {
 public:
  TypeError(std::string message, std::size_t offset)
      : std::runtime_error(std::move(message)), offset_(offset) {}
  [[nodiscard]] std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

using TypeScope = std::map<std::string, Type, std::less<>>;

/// Static type of `e` under `scope`. Throws TypeError.
Type check_expr(const Expr& e, const TypeScope& scope);

/// Checks an assignment against the declared type of its target.
void check_statement(const Statement& s, const TypeScope& scope);

enum class EvalErrorKind { DivisionByZero, Overflow, Underflow, UnboundVariable, TypeMismatch };

std::string_view eval_error_name(EvalErrorKind k);

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  [[nodiscard]] EvalErrorKind kind() const { return kind_; }

 private:
  EvalErrorKind kind_;
};

/// Evaluates with checked 256-bit arithmetic. Division truncates toward zero.
Value eval_expr(const Expr& e, const VarEnv& env);

/// Evaluates the statement and stores the result, coerced to the type of the
/// existing binding of the target (or kept as-is when unbound).
void exec_statement(const Statement& s, VarEnv& env);

}  // namespace procforge
