#include "procforge/marking.hpp"

#include <stdexcept>

namespace procforge {

std::string Marking::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 4; i-- > 0;) {
    for (int nib = 15; nib >= 0; --nib) {
      auto d = static_cast<unsigned>((words_[i] >> (nib * 4)) & 0xFU);
      if (out.empty() && d == 0) continue;
      out.push_back(kDigits[d]);
    }
  }
  if (out.empty()) out = "0";
  return "0x" + out;
}

Marking Marking::from_hex(std::string_view text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw std::invalid_argument("marking literal must start with 0x");
  }
  text.remove_prefix(2);
  if (text.size() > 64) throw std::invalid_argument("marking literal exceeds 256 bits");
  Marking m;
  std::size_t bit = 0;
  for (std::size_t i = text.size(); i-- > 0; bit += 4) {
    char c = text[i];
    unsigned v = 0;
    if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
    else throw std::invalid_argument("bad hex digit in marking literal");
    for (unsigned b = 0; b < 4; ++b) {
      if ((v >> b) & 1U) m.set(bit + b);
    }
  }
  return m;
}

}  // namespace procforge
