#include <cctype>
#include <optional>

#include "procforge/bpmn.hpp"

namespace procforge {

ConditionParseError::ConditionParseError(const std::string& message, std::size_t offset,
                                         std::vector<std::string> expected)
    : std::runtime_error(message + " at offset " + std::to_string(offset)),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

enum class Tok { End, Number, Ident, String, Address, Op, LParen, RParen, Semicolon };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t offset = 0;
  bool newline_before = false;
};

const std::vector<std::string> kOperandStart = {"number", "identifier", "string", "address", "true",
                                                "false",  "(",          "!",      "-"};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    bool newline = false;
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      if (s_[pos_] == '\n') newline = true;
      ++pos_;
    }
    Token t;
    t.offset = pos_;
    t.newline_before = newline;
    if (pos_ >= s_.size()) return t;

    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t begin = pos_;
      if (c == '0' && pos_ + 1 < s_.size() && (s_[pos_ + 1] == 'x' || s_[pos_ + 1] == 'X')) {
        pos_ += 2;
        while (pos_ < s_.size() && std::isxdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        t.kind = pos_ - begin == 42 ? Tok::Address : Tok::Number;
      } else {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        t.kind = Tok::Number;
      }
      if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        throw ConditionParseError("malformed number", begin, {"number"});
      }
      t.text = std::string(s_.substr(begin, pos_ - begin));
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t begin = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      t.kind = Tok::Ident;
      t.text = std::string(s_.substr(begin, pos_ - begin));
      return t;
    }
    if (c == '"' || c == '\'') {
      std::size_t begin = pos_++;
      std::string value;
      while (pos_ < s_.size() && s_[pos_] != c) {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        value.push_back(s_[pos_++]);
      }
      if (pos_ >= s_.size()) throw ConditionParseError("unterminated string literal", begin, {std::string(1, c)});
      ++pos_;
      t.kind = Tok::String;
      t.text = std::move(value);
      return t;
    }
    static constexpr std::string_view kTwoChar[] = {"==", "!=", "<=", ">=", "&&", "||", ":="};
    for (auto op : kTwoChar) {
      if (s_.substr(pos_, 2) == op) {
        pos_ += 2;
        t.kind = Tok::Op;
        t.text = std::string(op);
        return t;
      }
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '<': case '>': case '!': case '=':
        ++pos_;
        t.kind = Tok::Op;
        t.text = std::string(1, c);
        return t;
      case '(': ++pos_; t.kind = Tok::LParen; t.text = "("; return t;
      case ')': ++pos_; t.kind = Tok::RParen; t.text = ")"; return t;
      case ';': ++pos_; t.kind = Tok::Semicolon; t.text = ";"; return t;
      default: break;
    }
    throw ConditionParseError(std::string("unexpected character '") + c + "'", pos_, kOperandStart);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view s) : lex_(s) { cur_ = lex_.next(); }

  ExprPtr expression() { return disjunction(); }

  [[nodiscard]] const Token& current() const { return cur_; }
  void advance() { cur_ = lex_.next(); }

  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) const {
    std::string found = cur_.kind == Tok::End ? "end of input" : "'" + cur_.text + "'";
    throw ConditionParseError("expected " + what + ", found " + found, cur_.offset, std::move(expected));
  }

  bool at_op(std::string_view op) const { return cur_.kind == Tok::Op && cur_.text == op; }
  bool at_word(std::string_view w) const { return cur_.kind == Tok::Ident && cur_.text == w; }

 private:
  ExprPtr disjunction() {
    ExprPtr lhs = conjunction();
    while (at_op("||") || at_word("or")) {
      std::size_t at = cur_.offset;
      advance();
      lhs = Expr::make_binary(BinaryOp::Or, lhs, conjunction(), at);
    }
    return lhs;
  }

  ExprPtr conjunction() {
    ExprPtr lhs = comparison();
    while (at_op("&&") || at_word("and")) {
      std::size_t at = cur_.offset;
      advance();
      lhs = Expr::make_binary(BinaryOp::And, lhs, comparison(), at);
    }
    return lhs;
  }

  std::optional<BinaryOp> comparison_op() const {
    if (cur_.kind != Tok::Op) return std::nullopt;
    if (cur_.text == "==") return BinaryOp::Eq;
    if (cur_.text == "!=") return BinaryOp::Ne;
    if (cur_.text == "<") return BinaryOp::Lt;
    if (cur_.text == "<=") return BinaryOp::Le;
    if (cur_.text == ">") return BinaryOp::Gt;
    if (cur_.text == ">=") return BinaryOp::Ge;
    return std::nullopt;
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    if (auto op = comparison_op()) {
      std::size_t at = cur_.offset;
      advance();
      lhs = Expr::make_binary(*op, lhs, additive(), at);
      if (comparison_op()) fail("a connective or end of condition (comparisons do not chain)", {"&&", "||", ")"});
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (at_op("+") || at_op("-")) {
      BinaryOp op = cur_.text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      std::size_t at = cur_.offset;
      advance();
      lhs = Expr::make_binary(op, lhs, multiplicative(), at);
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = unary();
    while (at_op("*") || at_op("/")) {
      BinaryOp op = cur_.text == "*" ? BinaryOp::Mul : BinaryOp::Div;
      std::size_t at = cur_.offset;
      advance();
      lhs = Expr::make_binary(op, lhs, unary(), at);
    }
    return lhs;
  }

  ExprPtr unary() {
    std::size_t at = cur_.offset;
    if (at_op("!") || at_word("not")) {
      advance();
      return Expr::make_unary(UnaryOp::Not, unary(), at);
    }
    if (at_op("-")) {
      advance();
      return Expr::make_unary(UnaryOp::Negate, unary(), at);
    }
    return primary();
  }

  ExprPtr primary() {
    Token t = cur_;
    switch (t.kind) {
      case Tok::Number: {
        advance();
        BigInt v(t.text);
        if (v > uint256_max()) throw ConditionParseError("integer literal exceeds 256 bits", t.offset, {"number"});
        return Expr::make_literal(Value::literal(std::move(v)), t.offset);
      }
      case Tok::Address: {
        advance();
        auto a = Address::parse(t.text);
        return Expr::make_literal(Value::address(*a), t.offset);
      }
      case Tok::String:
        advance();
        return Expr::make_literal(Value::string(t.text), t.offset);
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          advance();
          return Expr::make_literal(Value::boolean(t.text == "true"), t.offset);
        }
        if (t.text == "and" || t.text == "or" || t.text == "not") break;
        advance();
        return Expr::make_variable(t.text, t.offset);
      case Tok::LParen: {
        advance();
        ExprPtr inner = expression();
        if (cur_.kind != Tok::RParen) fail("')'", {")"});
        advance();
        return inner;
      }
      default:
        break;
    }
    fail("an operand", kOperandStart);
  }

  Lexer lex_;
  Token cur_;
};

}  // namespace

ExprPtr parse_condition(std::string_view text) {
  Parser p(text);
  ExprPtr e = p.expression();
  if (p.current().kind != Tok::End) {
    p.fail("an operator or end of condition", {"operator", "end of input"});
  }
  return e;
}

std::vector<Statement> parse_script(std::string_view text) {
  Parser p(text);
  std::vector<Statement> out;
  while (p.current().kind != Tok::End) {
    if (p.current().kind == Tok::Semicolon) {
      p.advance();
      continue;
    }
    if (p.current().kind != Tok::Ident) p.fail("an assignment target", {"identifier"});
    Statement st;
    st.target = p.current().text;
    p.advance();
    if (!p.at_op("=") && !p.at_op(":=")) p.fail("'='", {"=", ":="});
    p.advance();
    st.value = p.expression();
    out.push_back(std::move(st));
    const Token& t = p.current();
    if (t.kind != Tok::End && t.kind != Tok::Semicolon && !t.newline_before) {
      p.fail("';' or a line break between statements", {";", "newline"});
    }
  }
  return out;
}

}  // namespace procforge
