#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "procforge/expr.hpp"
#include "procforge/model.hpp"
#include "procforge/validate.hpp"

namespace procforge {

inline constexpr std::string_view kBpmnNamespace = "http://www.omg.org/spec/BPMN/20100524/MODEL";
inline constexpr std::string_view kBcextNamespace = "urn:procforge:bcext:1";

class ConditionParseError : public std::runtime_error {
 public:
  ConditionParseError(const std::string& message, std::size_t offset, std::vector<std::string> expected);
  [[nodiscard]] std::size_t offset() const { return offset_; }
  [[nodiscard]] const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Parses a boolean/arithmetic condition such as `escrowBalance == price`.
/// Offsets in the result and in errors are byte offsets into `text`.
ExprPtr parse_condition(std::string_view text);

/// Parses a script body: assignments `name = expr` (or `name := expr`)
/// separated by `;` or line breaks.
std::vector<Statement> parse_script(std::string_view text);

enum class BpmnErrorKind {
  XmlSyntaxError,
  UnknownElement,
  DanglingReference,
  DuplicateId,
  MalformedAddress,
  ConditionParseError,
  InvalidValue,
  MissingAttribute,
};

std::string_view bpmn_error_name(BpmnErrorKind k);

class BpmnError : public std::runtime_error {
 public:
  BpmnError(BpmnErrorKind kind, const std::string& message, std::size_t line = 0, std::size_t column = 0);
  [[nodiscard]] BpmnErrorKind kind() const { return kind_; }
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }

 private:
  BpmnErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
};

/// Parses a BPMN 2.0 document with `bcext` extensions into a ProcessModel.
/// Sequence flows keep document order. Unknown attributes are reported as
/// warnings when `warnings` is given; unknown elements are errors.
ProcessModel parse_bpmn(std::string_view xml, std::vector<Diagnostic>* warnings = nullptr);

}  // namespace procforge
