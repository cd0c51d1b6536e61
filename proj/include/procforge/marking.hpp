#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>

namespace procforge {

inline constexpr std::size_t kMarkingBits = 256;

/// A 256-bit set of enabled sequence-flow bits. Mirrors the single storage
/// word that generated process contracts thread through task functions.
class Marking {
 public:
  constexpr Marking() = default;

  static Marking single(std::size_t bit) {
    Marking m;
    m.set(bit);
    return m;
  }

  void set(std::size_t bit) { words_[bit / 64] |= (std::uint64_t{1} << (bit % 64)); }
  void reset(std::size_t bit) { words_[bit / 64] &= ~(std::uint64_t{1} << (bit % 64)); }
  [[nodiscard]] bool test(std::size_t bit) const {
    return (words_[bit / 64] >> (bit % 64)) & 1U;
  }

  [[nodiscard]] bool none() const {
    return (words_[0] | words_[1] | words_[2] | words_[3]) == 0;
  }
  [[nodiscard]] bool any() const { return !none(); }

  [[nodiscard]] int popcount() const {
    int n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
  }

  /// True iff every bit of `mask` is also set here.
  [[nodiscard]] bool contains(const Marking& mask) const {
    for (std::size_t i = 0; i < 4; ++i) {
      if ((words_[i] & mask.words_[i]) != mask.words_[i]) return false;
    }
    return true;
  }

  [[nodiscard]] bool intersects(const Marking& other) const {
    for (std::size_t i = 0; i < 4; ++i) {
      if (words_[i] & other.words_[i]) return true;
    }
    return false;
  }

  Marking& operator|=(const Marking& o) {
    for (std::size_t i = 0; i < 4; ++i) words_[i] |= o.words_[i];
    return *this;
  }
  Marking& operator&=(const Marking& o) {
    for (std::size_t i = 0; i < 4; ++i) words_[i] &= o.words_[i];
    return *this;
  }
  [[nodiscard]] Marking operator~() const {
    Marking m;
    for (std::size_t i = 0; i < 4; ++i) m.words_[i] = ~words_[i];
    return m;
  }
  friend Marking operator|(Marking a, const Marking& b) { return a |= b; }
  friend Marking operator&(Marking a, const Marking& b) { return a &= b; }

  friend bool operator==(const Marking&, const Marking&) = default;
  friend auto operator<=>(const Marking& a, const Marking& b) {
    for (std::size_t i = 4; i-- > 0;) {
      if (auto c = a.words_[i] <=> b.words_[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
  }

  /// Lower-case hex with `0x` prefix and no leading zeros (`0x0` when empty).
  [[nodiscard]] std::string to_hex() const;

  /// Parses `0x`-prefixed hex of at most 64 digits. Throws std::invalid_argument.
  static Marking from_hex(std::string_view text);

  [[nodiscard]] const std::array<std::uint64_t, 4>& words() const { return words_; }

 private:
  std::array<std::uint64_t, 4> words_{};
};

struct MarkingHash {
  std::size_t operator()(const Marking& m) const noexcept {
    std::size_t h = 0;
    for (auto w : m.words()) h = h * 1000003U ^ std::hash<std::uint64_t>{}(w);
    return h;
  }
};

}  // namespace procforge
