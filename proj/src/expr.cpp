#include "procforge/expr.hpp"

#include <algorithm>

namespace procforge {

std::string_view op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

ExprPtr Expr::make_literal(Value v, std::size_t offset) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Literal;
  e->literal = std::move(v);
  e->offset = offset;
  return e;
}

ExprPtr Expr::make_variable(std::string name, std::size_t offset) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Variable;
  e->name = std::move(name);
  e->offset = offset;
  return e;
}

ExprPtr Expr::make_unary(UnaryOp op, ExprPtr operand, std::size_t offset) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->unary_op = op;
  e->lhs = std::move(operand);
  e->offset = offset;
  return e;
}

ExprPtr Expr::make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, std::size_t offset) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->binary_op = op;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  e->offset = offset;
  return e;
}

namespace {

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 3;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 4;
    case BinaryOp::Mul:
    case BinaryOp::Div: return 5;
  }
  return 0;
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary: return precedence(e.binary_op);
    case Expr::Kind::Unary: return 6;
    default: return 7;
  }
}

void render(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      out += e.literal.to_string();
      return;
    case Expr::Kind::Variable:
      out += e.name;
      return;
    case Expr::Kind::Unary: {
      out += e.unary_op == UnaryOp::Not ? "!" : "-";
      bool paren = precedence(*e.lhs) < 6;
      if (paren) out += "(";
      render(*e.lhs, out);
      if (paren) out += ")";
      return;
    }
    case Expr::Kind::Binary: {
      int p = precedence(e.binary_op);
      // Left-associative: the right operand needs parentheses at equal precedence.
      bool lparen = precedence(*e.lhs) < p || (p == 3 && precedence(*e.lhs) == 3);
      bool rparen = precedence(*e.rhs) <= p;
      if (lparen) out += "(";
      render(*e.lhs, out);
      if (lparen) out += ")";
      out += " ";
      out += op_symbol(e.binary_op);
      out += " ";
      if (rparen) out += "(";
      render(*e.rhs, out);
      if (rparen) out += ")";
      return;
    }
  }
}

void collect(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Variable) {
    if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
  }
  if (e.lhs) collect(*e.lhs, out);
  if (e.rhs) collect(*e.rhs, out);
}

std::optional<Type> unify_integers(Type a, Type b) {
  if (!is_integer(a) || !is_integer(b)) return std::nullopt;
  if (a == Type::IntLiteral) return b;
  if (b == Type::IntLiteral) return a;
  if (a == b) return a;
  return std::nullopt;
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul || op == BinaryOp::Div;
}

bool is_ordering(BinaryOp op) {
  return op == BinaryOp::Lt || op == BinaryOp::Le || op == BinaryOp::Gt || op == BinaryOp::Ge;
}

std::string mismatch(const Expr& e, Type a, Type b) {
  return "operator '" + std::string(op_symbol(e.binary_op)) + "' cannot combine " +
         std::string(type_name(a)) + " and " + std::string(type_name(b));
}

}  // namespace

std::string to_source(const Expr& e) {
  std::string out;
  render(e, out);
  return out;
}

std::string to_source(const Statement& s) { return s.target + " = " + to_source(*s.value); }

std::vector<std::string> referenced_variables(const Expr& e) {
  std::vector<std::string> out;
  collect(e, out);
  return out;
}

Type check_expr(const Expr& e, const TypeScope& scope) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      return e.literal.type();
    case Expr::Kind::Variable: {
      auto it = scope.find(e.name);
      if (it == scope.end()) throw TypeError("undeclared variable '" + e.name + "'", e.offset);
      return it->second;
    }
    case Expr::Kind::Unary: {
      Type t = check_expr(*e.lhs, scope);
      if (e.unary_op == UnaryOp::Not) {
        if (t != Type::Bool) throw TypeError("'!' expects bool, got " + std::string(type_name(t)), e.offset);
        return Type::Bool;
      }
      if (t != Type::Int256 && t != Type::IntLiteral) {
        throw TypeError("unary '-' expects int256, got " + std::string(type_name(t)), e.offset);
      }
      return t;
    }
    case Expr::Kind::Binary: {
      Type a = check_expr(*e.lhs, scope);
      Type b = check_expr(*e.rhs, scope);
      BinaryOp op = e.binary_op;
      if (op == BinaryOp::And || op == BinaryOp::Or) {
        if (a != Type::Bool || b != Type::Bool) throw TypeError(mismatch(e, a, b), e.offset);
        return Type::Bool;
      }
      if (is_arithmetic(op)) {
        auto t = unify_integers(a, b);
        if (!t) throw TypeError(mismatch(e, a, b), e.offset);
        return *t;
      }
      if (is_ordering(op)) {
        if (!unify_integers(a, b)) throw TypeError(mismatch(e, a, b), e.offset);
        return Type::Bool;
      }
      // == and !=
      if (unify_integers(a, b) || (a == b && !is_integer(a))) return Type::Bool;
      throw TypeError(mismatch(e, a, b), e.offset);
    }
  }
  throw TypeError("malformed expression", e.offset);
}

void check_statement(const Statement& s, const TypeScope& scope) {
  auto it = scope.find(s.target);
  if (it == scope.end()) throw TypeError("assignment to undeclared variable '" + s.target + "'", 0);
  Type t = check_expr(*s.value, scope);
  bool ok = t == it->second || (t == Type::IntLiteral && is_integer(it->second));
  if (!ok) {
    throw TypeError("cannot assign " + std::string(type_name(t)) + " to " +
                        std::string(type_name(it->second)) + " variable '" + s.target + "'",
                    s.value->offset);
  }
}

std::string_view eval_error_name(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::DivisionByZero: return "DivisionByZero";
    case EvalErrorKind::Overflow: return "ArithmeticOverflow";
    case EvalErrorKind::Underflow: return "ArithmeticUnderflow";
    case EvalErrorKind::UnboundVariable: return "UnboundVariable";
    case EvalErrorKind::TypeMismatch: return "TypeMismatch";
  }
  return "?";
}

namespace {

Value checked(BigInt v, Type t, const Expr& e) {
  if (!in_range(v, t)) {
    bool under = t == Type::Uint256 ? v < 0 : v < int256_min();
    throw EvalError(under ? EvalErrorKind::Underflow : EvalErrorKind::Overflow,
                    "result of '" + to_source(e) + "' out of " + std::string(type_name(t)) +
                        " range");
  }
  switch (t) {
    case Type::Uint256: return Value::uint256(std::move(v));
    case Type::Int256: return Value::int256(std::move(v));
    default: return Value::literal(std::move(v));
  }
}

[[noreturn]] void type_mismatch(const Expr& e) {
  throw EvalError(EvalErrorKind::TypeMismatch, "ill-typed operands in '" + to_source(e) + "'");
}

}  // namespace

Value eval_expr(const Expr& e, const VarEnv& env) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      return e.literal;
    case Expr::Kind::Variable: {
      auto it = env.find(e.name);
      if (it == env.end()) {
        throw EvalError(EvalErrorKind::UnboundVariable, "variable '" + e.name + "' is unbound");
      }
      return it->second;
    }
    case Expr::Kind::Unary: {
      Value v = eval_expr(*e.lhs, env);
      if (e.unary_op == UnaryOp::Not) {
        if (v.type() != Type::Bool) type_mismatch(e);
        return Value::boolean(!v.as_bool());
      }
      if (v.type() != Type::Int256 && v.type() != Type::IntLiteral) type_mismatch(e);
      return checked(-v.as_int(), v.type(), e);
    }
    case Expr::Kind::Binary:
      break;
  }

  BinaryOp op = e.binary_op;
  // Short-circuit connectives: the right operand is not evaluated when the
  // left one decides the result.
  if (op == BinaryOp::And || op == BinaryOp::Or) {
    Value l = eval_expr(*e.lhs, env);
    if (l.type() != Type::Bool) type_mismatch(e);
    if (op == BinaryOp::And && !l.as_bool()) return Value::boolean(false);
    if (op == BinaryOp::Or && l.as_bool()) return Value::boolean(true);
    Value r = eval_expr(*e.rhs, env);
    if (r.type() != Type::Bool) type_mismatch(e);
    return Value::boolean(r.as_bool());
  }

  Value l = eval_expr(*e.lhs, env);
  Value r = eval_expr(*e.rhs, env);
  auto t = unify_integers(l.type(), r.type());

  if (op == BinaryOp::Eq || op == BinaryOp::Ne) {
    bool eq = false;
    if (t) eq = l.as_int() == r.as_int();
    else if (l.type() == r.type()) eq = l == r;
    else type_mismatch(e);
    return Value::boolean(op == BinaryOp::Eq ? eq : !eq);
  }

  if (!t) type_mismatch(e);
  const BigInt& a = l.as_int();
  const BigInt& b = r.as_int();
  switch (op) {
    case BinaryOp::Lt: return Value::boolean(a < b);
    case BinaryOp::Le: return Value::boolean(a <= b);
    case BinaryOp::Gt: return Value::boolean(a > b);
    case BinaryOp::Ge: return Value::boolean(a >= b);
    case BinaryOp::Add: return checked(a + b, *t, e);
    case BinaryOp::Sub: return checked(a - b, *t, e);
    case BinaryOp::Mul: return checked(a * b, *t, e);
    case BinaryOp::Div:
      if (b == 0) throw EvalError(EvalErrorKind::DivisionByZero, "division by zero in '" + to_source(e) + "'");
      return checked(a / b, *t, e);
    default: break;
  }
  type_mismatch(e);
}

void exec_statement(const Statement& s, VarEnv& env) {
  Value v = eval_expr(*s.value, env);
  auto it = env.find(s.target);
  if (it == env.end()) {
    env.emplace(s.target, std::move(v));
    return;
  }
  auto coerced = coerce(v, it->second.type());
  if (!coerced) {
    throw EvalError(v.type() == Type::IntLiteral ? EvalErrorKind::Overflow : EvalErrorKind::TypeMismatch,
                    "cannot store " + v.to_string() + " in " +
                        std::string(type_name(it->second.type())) + " variable '" + s.target + "'");
  }
  it->second = std::move(*coerced);
}

}  // namespace procforge
