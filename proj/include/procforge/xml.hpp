#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace procforge::xml {

struct Position {
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, Position pos)
      : std::runtime_error("XML syntax error at line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + message),
        pos_(pos) {}
  [[nodiscard]] const Position& position() const { return pos_; }

 private:
  Position pos_;
};

struct Attribute {
  std::string qname;
  std::string local;
  /// Empty for unprefixed attributes (which are in no namespace).
  std::string ns;
  std::string value;
};

struct Element {
  std::string qname;
  std::string local;
  std::string ns;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  /// Concatenated character data directly inside this element.
  std::string text;
  Position position;
  /// Prefix -> URI bindings in scope at this element ("" is the default namespace).
  std::map<std::string, std::string> namespaces;

  [[nodiscard]] const Attribute* attribute(std::string_view local_name) const;
  [[nodiscard]] bool is(std::string_view ns_uri, std::string_view local_name) const {
    return ns == ns_uri && local == local_name;
  }
};

/// Parses a complete document and returns its root element. Supports
/// namespaces, comments, processing instructions, CDATA, a skipped DOCTYPE,
/// and the predefined and numeric character references.
Element parse(std::string_view text);

}  // namespace procforge::xml
