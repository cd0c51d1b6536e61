#include <gmpxx.h>
#include <gtest/gtest.h>

#include <optional>
#include <random>
#include <variant>

#include "procforge/bpmn.hpp"
#include "procforge/expr.hpp"

using namespace procforge;

namespace {

ExprPtr var(const char* n) { return Expr::make_variable(n); }
ExprPtr lit(long v) { return Expr::make_literal(Value::literal(v)); }
ExprPtr bin(BinaryOp op, ExprPtr a, ExprPtr b) { return Expr::make_binary(op, std::move(a), std::move(b)); }

Value u(long v) { return Value::uint256(v); }

}  // namespace

TEST(Eval, GrainWeightSubtraction) {
  VarEnv env{{"truckWeightWithConsignment", u(40)}, {"truckWeightWithoutConsignment", u(15)}};
  auto e = parse_condition("truckWeightWithConsignment - truckWeightWithoutConsignment");
  Value v = eval_expr(*e, env);
  EXPECT_EQ(v.type(), Type::Uint256);
  EXPECT_EQ(v.as_int(), 25);
}

TEST(Eval, DivisionByZero) {
  VarEnv env{{"x", u(7)}, {"y", u(0)}};
  try {
    (void)eval_expr(*bin(BinaryOp::Div, var("x"), var("y")), env);
    FAIL() << "expected DivisionByZero";
  } catch (const EvalError& e) {
    EXPECT_EQ(e.kind(), EvalErrorKind::DivisionByZero);
  }
}

TEST(Eval, ComparisonAndNegation) {
  VarEnv env{{"a", u(1)}, {"b", u(2)}, {"c", Value::boolean(false)}};
  EXPECT_TRUE(eval_expr(*parse_condition("a < b && !c"), env).as_bool());
}

TEST(Eval, UnsignedSubtractionBelowZeroUnderflows) {
  VarEnv env{{"a", u(1)}, {"b", u(2)}};
  try {
    (void)eval_expr(*parse_condition("a - b"), env);
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.kind(), EvalErrorKind::Underflow);
  }
}

TEST(Eval, UnboundVariable) {
  try {
    (void)eval_expr(*var("nope"), {});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.kind(), EvalErrorKind::UnboundVariable);
  }
}

TEST(Eval, ShortCircuitSkipsRightOperand) {
  VarEnv env{{"x", u(0)}};
  EXPECT_FALSE(eval_expr(*parse_condition("x > 0 && 10 / x > 1"), env).as_bool());
  EXPECT_TRUE(eval_expr(*parse_condition("x == 0 || 10 / x > 1"), env).as_bool());
}

TEST(Eval, SignedDivisionTruncatesTowardZero) {
  VarEnv env{{"a", Value::int256(-7)}, {"b", Value::int256(2)}};
  EXPECT_EQ(eval_expr(*parse_condition("a / b"), env).as_int(), -3);
}

TEST(Eval, StatementCoercesToBindingType) {
  VarEnv env{{"w", u(0)}};
  exec_statement({"w", lit(5)}, env);
  EXPECT_EQ(env.at("w"), u(5));
  exec_statement({"fresh", lit(3)}, env);
  EXPECT_EQ(env.at("fresh").as_int(), 3);
}

TEST(TypeCheck, StringsCompareForEqualityOnly) {
  TypeScope scope{{"s", Type::String}, {"t", Type::String}, {"n", Type::Uint256}};
  EXPECT_EQ(check_expr(*parse_condition("s == t"), scope), Type::Bool);
  EXPECT_THROW(check_expr(*parse_condition("s < t"), scope), TypeError);
  EXPECT_THROW(check_expr(*parse_condition("s + t"), scope), TypeError);
  EXPECT_THROW(check_expr(*parse_condition("s == n"), scope), TypeError);
  EXPECT_THROW(check_expr(*parse_condition("missing > 1"), scope), TypeError);
}

TEST(TypeCheck, StatementTarget) {
  TypeScope scope{{"w", Type::Uint256}, {"flag", Type::Bool}};
  EXPECT_NO_THROW(check_statement({"w", parse_condition("w + 1")}, scope));
  EXPECT_THROW(check_statement({"flag", parse_condition("w + 1")}, scope), TypeError);
  EXPECT_THROW(check_statement({"undeclared", parse_condition("1")}, scope), TypeError);
}

// ---------------------------------------------------------------------------
// Randomised agreement with an independent GMP reference evaluator.

namespace {

enum class RT { U, I, L, B };

struct RefError {
  EvalErrorKind kind;
};

struct RefValue {
  RT type;
  mpz_class n;
  bool b = false;
};

const mpz_class& two_pow(unsigned k) {
  static std::map<unsigned, mpz_class> cache;
  auto it = cache.find(k);
  if (it == cache.end()) {
    mpz_class v;
    mpz_ui_pow_ui(v.get_mpz_t(), 2, k);
    it = cache.emplace(k, v).first;
  }
  return it->second;
}

RefValue range(const mpz_class& v, RT t) {
  mpz_class lo = t == RT::U ? mpz_class(0) : mpz_class(-two_pow(255));
  mpz_class hi = t == RT::I ? mpz_class(two_pow(255) - 1) : mpz_class(two_pow(256) - 1);
  if (v < lo) throw RefError{EvalErrorKind::Underflow};
  if (v > hi) throw RefError{EvalErrorKind::Overflow};
  return {t, v};
}

mpz_class to_mpz(const BigInt& v) {
  std::ostringstream os;
  os << v;
  return mpz_class(os.str());
}

RefValue ref_eval(const Expr& e, const VarEnv& env) {
  switch (e.kind) {
    case Expr::Kind::Literal: {
      const Value& v = e.literal;
      if (v.type() == Type::Bool) return {RT::B, 0, v.as_bool()};
      return {RT::L, to_mpz(v.as_int())};
    }
    case Expr::Kind::Variable: {
      const Value& v = env.at(e.name);
      if (v.type() == Type::Bool) return {RT::B, 0, v.as_bool()};
      return {v.type() == Type::Uint256 ? RT::U : RT::I, to_mpz(v.as_int())};
    }
    case Expr::Kind::Unary: {
      RefValue x = ref_eval(*e.lhs, env);
      if (e.unary_op == UnaryOp::Not) return {RT::B, 0, !x.b};
      return range(-x.n, x.type);
    }
    case Expr::Kind::Binary:
      break;
  }
  if (e.binary_op == BinaryOp::And || e.binary_op == BinaryOp::Or) {
    RefValue l = ref_eval(*e.lhs, env);
    if (e.binary_op == BinaryOp::And && !l.b) return {RT::B, 0, false};
    if (e.binary_op == BinaryOp::Or && l.b) return {RT::B, 0, true};
    return {RT::B, 0, ref_eval(*e.rhs, env).b};
  }
  RefValue l = ref_eval(*e.lhs, env);
  RefValue r = ref_eval(*e.rhs, env);
  RT t = l.type == RT::L ? r.type : l.type;
  switch (e.binary_op) {
    case BinaryOp::Eq: return {RT::B, 0, l.type == RT::B ? l.b == r.b : l.n == r.n};
    case BinaryOp::Ne: return {RT::B, 0, l.type == RT::B ? l.b != r.b : l.n != r.n};
    case BinaryOp::Lt: return {RT::B, 0, l.n < r.n};
    case BinaryOp::Le: return {RT::B, 0, l.n <= r.n};
    case BinaryOp::Gt: return {RT::B, 0, l.n > r.n};
    case BinaryOp::Ge: return {RT::B, 0, l.n >= r.n};
    case BinaryOp::Add: return range(l.n + r.n, t);
    case BinaryOp::Sub: return range(l.n - r.n, t);
    case BinaryOp::Mul: return range(l.n * r.n, t);
    case BinaryOp::Div: {
      if (r.n == 0) throw RefError{EvalErrorKind::DivisionByZero};
      mpz_class q;
      mpz_tdiv_q(q.get_mpz_t(), l.n.get_mpz_t(), r.n.get_mpz_t());
      return range(q, t);
    }
    default:
      break;
  }
  throw std::logic_error("unreachable");
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  ExprPtr integer(RT t, int depth) {
    if (depth <= 0 || pick(3) == 0) {
      if (pick(3) == 0) return small_literal();
      return var(t == RT::U ? kU[pick(3)] : kI[pick(2)]);
    }
    int op = static_cast<int>(pick(t == RT::I ? 5 : 4));
    if (op == 4) return Expr::make_unary(UnaryOp::Negate, integer(t, depth - 1));
    static constexpr BinaryOp kOps[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div};
    return bin(kOps[op], integer(t, depth - 1), integer(t, depth - 1));
  }

  ExprPtr boolean(int depth) {
    if (depth <= 0 || pick(4) == 0) return var(pick(2) ? "b1" : "b2");
    switch (pick(4)) {
      case 0: return Expr::make_unary(UnaryOp::Not, boolean(depth - 1));
      case 1: return bin(pick(2) ? BinaryOp::And : BinaryOp::Or, boolean(depth - 1), boolean(depth - 1));
      case 2: return bin(pick(2) ? BinaryOp::Eq : BinaryOp::Ne, boolean(depth - 1), boolean(depth - 1));
      default: {
        static constexpr BinaryOp kCmp[] = {BinaryOp::Eq, BinaryOp::Ne, BinaryOp::Lt,
                                            BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge};
        RT t = pick(2) ? RT::U : RT::I;
        return bin(kCmp[pick(6)], integer(t, depth - 1), integer(t, depth - 1));
      }
    }
  }

  VarEnv env() {
    VarEnv e;
    for (const char* n : kU) e.emplace(n, Value::uint256(big(false)));
    for (const char* n : kI) e.emplace(n, Value::int256(big(true)));
    e.emplace("b1", Value::boolean(pick(2)));
    e.emplace("b2", Value::boolean(pick(2)));
    return e;
  }

 private:
  static constexpr const char* kU[] = {"u1", "u2", "u3"};
  static constexpr const char* kI[] = {"i1", "i2"};

  std::uint64_t pick(std::uint64_t n) { return rng_() % n; }

  ExprPtr small_literal() { return lit(static_cast<long>(pick(20))); }

  BigInt big(bool is_signed) {
    BigInt v;
    switch (pick(4)) {
      case 0: v = pick(10); break;
      case 1: v = pick(1000000); break;
      case 2: v = BigInt(1) << (pick(is_signed ? 254 : 255) + 1); v -= pick(3); break;
      default: v = BigInt(pick(1u << 30)) * BigInt(pick(1u << 30)); break;
    }
    if (is_signed && pick(2)) v = -v;
    return v;
  }

  std::mt19937_64 rng_;
};

}  // namespace

TEST(Eval, AgreesWithReferenceEvaluator) {
  int agreed_values = 0;
  int agreed_errors = 0;
  for (std::uint64_t seed = 1; seed <= 3000; ++seed) {
    Gen g(seed);
    VarEnv env = g.env();
    ExprPtr e = seed % 2 ? g.boolean(6) : g.integer(seed % 4 == 0 ? RT::I : RT::U, 6);
    std::optional<RefValue> want;
    std::optional<EvalErrorKind> want_err;
    try {
      want = ref_eval(*e, env);
    } catch (const RefError& err) {
      want_err = err.kind;
    }
    try {
      Value got = eval_expr(*e, env);
      ASSERT_TRUE(want.has_value()) << to_source(*e) << " expected " << eval_error_name(*want_err);
      if (got.type() == Type::Bool) {
        EXPECT_EQ(got.as_bool(), want->b) << to_source(*e);
      } else {
        EXPECT_EQ(to_mpz(got.as_int()), want->n) << to_source(*e);
      }
      ++agreed_values;
    } catch (const EvalError& err) {
      ASSERT_TRUE(want_err.has_value()) << to_source(*e) << " threw " << err.what();
      EXPECT_EQ(err.kind(), *want_err) << to_source(*e);
      ++agreed_errors;
    }
  }
  // both outcomes must actually be exercised
  EXPECT_GT(agreed_values, 500);
  EXPECT_GT(agreed_errors, 100);
}

TEST(Eval, SourceRoundTripPreservesMeaning) {
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    Gen g(seed * 7919);
    VarEnv env = g.env();
    ExprPtr e = g.boolean(5);
    ExprPtr back = parse_condition(to_source(*e));
    EXPECT_EQ(to_source(*back), to_source(*e));
    std::optional<bool> a, b;
    try { a = eval_expr(*e, env).as_bool(); } catch (const EvalError&) {}
    try { b = eval_expr(*back, env).as_bool(); } catch (const EvalError&) {}
    EXPECT_EQ(a, b) << to_source(*e);
  }
}

// ---------------------------------------------------------------------------
// Condition and script grammar.

TEST(ConditionParser, Comparison) {
  auto e = parse_condition("escrowBalance == price");
  ASSERT_EQ(e->kind, Expr::Kind::Binary);
  EXPECT_EQ(e->binary_op, BinaryOp::Eq);
  EXPECT_EQ(e->lhs->name, "escrowBalance");
  EXPECT_EQ(e->rhs->name, "price");
}

TEST(ConditionParser, ErrorOffsetAndExpectedSet) {
  try {
    (void)parse_condition("a + * b");
    FAIL() << "expected ConditionParseError";
  } catch (const ConditionParseError& err) {
    EXPECT_EQ(err.offset(), 4u);
    const auto& exp = err.expected();
    EXPECT_NE(std::find(exp.begin(), exp.end(), "identifier"), exp.end());
    EXPECT_NE(std::find(exp.begin(), exp.end(), "number"), exp.end());
  }
}

TEST(ConditionParser, ConjunctionOfComparisons) {
  auto e = parse_condition("weight >= 10 && quality >= 3");
  ASSERT_EQ(e->binary_op, BinaryOp::And);
  EXPECT_EQ(e->lhs->binary_op, BinaryOp::Ge);
  EXPECT_EQ(e->rhs->binary_op, BinaryOp::Ge);
  for (long w : {9L, 10L, 11L}) {
    for (long q : {2L, 3L, 4L}) {
      VarEnv env{{"weight", u(w)}, {"quality", u(q)}};
      EXPECT_EQ(eval_expr(*e, env).as_bool(), ref_eval(*e, env).b);
    }
  }
}

TEST(ConditionParser, Precedence) {
  EXPECT_EQ(to_source(*parse_condition("a + b * c")), "a + b * c");
  EXPECT_EQ(to_source(*parse_condition("(a + b) * c")), "(a + b) * c");
  EXPECT_EQ(to_source(*parse_condition("a - (b - c)")), "a - (b - c)");
  EXPECT_EQ(parse_condition("x or y and z")->binary_op, BinaryOp::Or);
  EXPECT_EQ(parse_condition("not x and y")->binary_op, BinaryOp::And);
}

TEST(ConditionParser, Literals) {
  EXPECT_EQ(parse_condition("true")->literal, Value::boolean(true));
  EXPECT_EQ(parse_condition("\"hello\"")->literal, Value::string("hello"));
  auto a = parse_condition("0xD3E4EBe81b55EA73b559da31ADf2CAc3b254ea11");
  EXPECT_EQ(a->literal.type(), Type::Address);
  EXPECT_EQ(parse_condition("0x44")->literal.as_int(), 0x44);
}

TEST(ConditionParser, RejectsChainedComparisonAndTrailingTokens) {
  EXPECT_THROW(parse_condition("a < b < c"), ConditionParseError);
  EXPECT_THROW(parse_condition("a b"), ConditionParseError);
  EXPECT_THROW(parse_condition("(a"), ConditionParseError);
  EXPECT_THROW(parse_condition(""), ConditionParseError);
  EXPECT_THROW(parse_condition("a # b"), ConditionParseError);
}

TEST(ScriptParser, StatementsSplitBySemicolonOrNewline) {
  auto s = parse_script("a = b - c; d := 1\ne = d * 2\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].target, "a");
  EXPECT_EQ(s[1].target, "d");
  EXPECT_EQ(to_source(s[2]), "e = d * 2");
  EXPECT_TRUE(parse_script("  \n ").empty());
  EXPECT_THROW(parse_script("a = 1 b = 2"), ConditionParseError);
  EXPECT_THROW(parse_script("= 1"), ConditionParseError);
}
