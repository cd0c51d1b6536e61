#include "procforge/xml.hpp"

#include <cstdint>
#include <set>

namespace procforge::xml {

const Attribute* Element::attribute(std::string_view local_name) const {
  for (const auto& a : attributes) {
    if (a.ns.empty() && a.local == local_name) return &a;
  }
  return nullptr;
}

namespace {

constexpr std::string_view kXmlNs = "http://www.w3.org/XML/1998/namespace";

bool is_name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct RawAttribute {
  std::string qname;
  std::string value;
  Position pos;
};

class Reader {
 public:
  explicit Reader(std::string_view text) : s_(text) {}

  Element document() {
    if (s_.substr(0, 3) == "\xEF\xBB\xBF") advance(3);
    skip_misc();
    if (eof() || peek() != '<') fail("expected root element");
    std::map<std::string, std::string> scope{{"xml", std::string(kXmlNs)}};
    Element root = element(scope);
    skip_misc();
    if (!eof()) fail("content after the root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, Position p) const { throw SyntaxError(msg, p); }

  [[nodiscard]] bool eof() const { return pos_.offset >= s_.size(); }
  [[nodiscard]] char peek(std::size_t ahead = 0) const {
    return pos_.offset + ahead < s_.size() ? s_[pos_.offset + ahead] : '\0';
  }
  [[nodiscard]] bool starts_with(std::string_view lit) const { return s_.substr(pos_.offset, lit.size()) == lit; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && !eof(); ++i) {
      if (s_[pos_.offset] == '\n') {
        ++pos_.line;
        pos_.column = 1;
      } else {
        ++pos_.column;
      }
      ++pos_.offset;
    }
  }

  void expect(std::string_view lit) {
    if (!starts_with(lit)) fail("expected '" + std::string(lit) + "'");
    advance(lit.size());
  }

  void skip_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) advance();
  }

  void skip_until(std::string_view terminator, const char* what) {
    auto idx = s_.find(terminator, pos_.offset);
    if (idx == std::string_view::npos) fail(std::string("unterminated ") + what);
    advance(idx - pos_.offset + terminator.size());
  }

  void skip_doctype() {
    // Internal subsets are skipped by bracket depth; entity declarations are not honoured.
    advance(9);
    int depth = 0;
    while (!eof()) {
      char c = peek();
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth <= 0) {
        advance();
        return;
      }
      advance();
    }
    fail("unterminated DOCTYPE");
  }

  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts_with("<?")) skip_until("?>", "processing instruction");
      else if (starts_with("<!--")) skip_until("-->", "comment");
      else if (starts_with("<!DOCTYPE")) skip_doctype();
      else return;
    }
  }

  std::string name() {
    if (eof() || !is_name_start(peek())) fail("expected a name");
    std::size_t begin = pos_.offset;
    while (!eof() && is_name_char(peek())) advance();
    return std::string(s_.substr(begin, pos_.offset - begin));
  }

  void reference(std::string& out) {
    Position at = pos_;
    advance();  // '&'
    auto semi = s_.find(';', pos_.offset);
    if (semi == std::string_view::npos || semi - pos_.offset > 10) fail_at("unterminated character reference", at);
    std::string_view ref = s_.substr(pos_.offset, semi - pos_.offset);
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (ref.size() > 1 && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ref[1] == 'x';
      std::string_view digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) fail_at("empty numeric character reference", at);
      for (char c : digits) {
        int v = -1;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        if (v < 0) fail_at("bad numeric character reference", at);
        cp = cp * (hex ? 16U : 10U) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) fail_at("character reference out of range", at);
      }
      append_utf8(out, cp);
    } else {
      fail_at("unknown entity '&" + std::string(ref) + ";'", at);
    }
    advance(ref.size() + 1);
  }

  std::string attribute_value() {
    char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    advance();
    std::string out;
    for (;;) {
      if (eof()) fail("unterminated attribute value");
      char c = peek();
      if (c == quote) break;
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') {
        reference(out);
        continue;
      }
      // Attribute-value normalisation of whitespace characters.
      out.push_back(c == '\n' || c == '\t' || c == '\r' ? ' ' : c);
      advance();
    }
    advance();
    return out;
  }

  static std::pair<std::string, std::string> split_qname(const std::string& q) {
    auto colon = q.find(':');
    if (colon == std::string::npos) return {"", q};
    return {q.substr(0, colon), q.substr(colon + 1)};
  }

  Element element(const std::map<std::string, std::string>& parent_scope) {
    Element el;
    el.position = pos_;
    expect("<");
    el.qname = name();

    std::vector<RawAttribute> raw;
    std::set<std::string> seen;
    bool self_closing = false;
    for (;;) {
      bool had_space = !eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r');
      skip_space();
      if (eof()) fail("unterminated start tag");
      if (starts_with("/>")) {
        advance(2);
        self_closing = true;
        break;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_space) fail("expected whitespace between attributes");
      Position at = pos_;
      std::string q = name();
      skip_space();
      expect("=");
      skip_space();
      std::string v = attribute_value();
      if (!seen.insert(q).second) fail_at("duplicate attribute '" + q + "'", at);
      raw.push_back({std::move(q), std::move(v), at});
    }

    el.namespaces = parent_scope;
    for (const auto& a : raw) {
      if (a.qname == "xmlns") el.namespaces[""] = a.value;
      else if (a.qname.rfind("xmlns:", 0) == 0) {
        if (a.value.empty()) fail_at("empty namespace URI for prefix", a.pos);
        el.namespaces[a.qname.substr(6)] = a.value;
      }
    }

    auto [prefix, local] = split_qname(el.qname);
    auto ns = el.namespaces.find(prefix);
    if (ns == el.namespaces.end() && !prefix.empty()) {
      fail_at("unbound namespace prefix '" + prefix + "'", el.position);
    }
    el.local = local;
    if (ns != el.namespaces.end()) el.ns = ns->second;

    std::set<std::pair<std::string, std::string>> expanded;
    for (auto& a : raw) {
      if (a.qname == "xmlns" || a.qname.rfind("xmlns:", 0) == 0) continue;
      auto [ap, al] = split_qname(a.qname);
      Attribute attr;
      attr.qname = a.qname;
      attr.local = al;
      if (!ap.empty()) {
        auto it = el.namespaces.find(ap);
        if (it == el.namespaces.end()) fail_at("unbound namespace prefix '" + ap + "'", a.pos);
        attr.ns = it->second;
      }
      if (!expanded.insert({attr.ns, attr.local}).second) fail_at("duplicate attribute '" + a.qname + "'", a.pos);
      attr.value = std::move(a.value);
      el.attributes.push_back(std::move(attr));
    }

    if (self_closing) return el;

    for (;;) {
      if (eof()) fail_at("element <" + el.qname + "> is never closed", el.position);
      if (starts_with("</")) {
        Position at = pos_;
        advance(2);
        std::string closing = name();
        skip_space();
        expect(">");
        if (closing != el.qname) {
          fail_at("mismatched closing tag </" + closing + "> for <" + el.qname + ">", at);
        }
        return el;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        advance(9);
        auto end = s_.find("]]>", pos_.offset);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        el.text.append(s_.substr(pos_.offset, end - pos_.offset));
        advance(end - pos_.offset + 3);
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        el.children.push_back(element(el.namespaces));
      } else if (peek() == '&') {
        reference(el.text);
      } else {
        el.text.push_back(peek());
        advance();
      }
    }
  }

  std::string_view s_;
  Position pos_;
};

}  // namespace

Element parse(std::string_view text) { return Reader(text).document(); }

}  // namespace procforge::xml
