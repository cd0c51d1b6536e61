#include "procforge/address.hpp"

#include <cstring>

namespace procforge {

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

constexpr std::array<int, 25> kRotations = {0,  1,  62, 28, 27, 36, 44, 6,  55,
                                            20, 3,  10, 43, 25, 39, 41, 45, 15,
                                            21, 8,  18, 2,  61, 56, 14};

std::uint64_t rotl(std::uint64_t x, int n) {
  return n == 0 ? x : (x << n) | (x >> (64 - n));
}

void keccak_f(std::array<std::uint64_t, 25>& a) {
  for (auto rc : kRoundConstants) {
    std::array<std::uint64_t, 5> c{};
    for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) a[y + x] ^= d;
    }
    std::array<std::uint64_t, 25> b{};
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl(a[x + 5 * y], kRotations[x + 5 * y]);
      }
    }
    for (int y = 0; y < 25; y += 5) {
      for (int x = 0; x < 5; ++x) {
        a[y + x] = b[y + x] ^ (~b[y + (x + 1) % 5] & b[y + (x + 2) % 5]);
      }
    }
    a[0] ^= rc;
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::array<std::uint8_t, 32> keccak256(std::span<const std::uint8_t> data) {
  constexpr std::size_t kRate = 136;
  std::array<std::uint64_t, 25> state{};
  auto absorb = [&state](const std::uint8_t* block) {
    for (std::size_t i = 0; i < kRate / 8; ++i) {
      std::uint64_t lane = 0;
      for (int b = 7; b >= 0; --b) lane = (lane << 8) | block[i * 8 + static_cast<std::size_t>(b)];
      state[i] ^= lane;
    }
    keccak_f(state);
  };

  std::size_t offset = 0;
  while (data.size() - offset >= kRate) {
    absorb(data.data() + offset);
    offset += kRate;
  }
  std::array<std::uint8_t, kRate> last{};
  std::memcpy(last.data(), data.data() + offset, data.size() - offset);
  last[data.size() - offset] ^= 0x01;
  last[kRate - 1] ^= 0x80;
  absorb(last.data());

  std::array<std::uint8_t, 32> out{};
  for (std::size_t i = 0; i < 32; ++i) {
    out[i] = static_cast<std::uint8_t>(state[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

std::array<std::uint8_t, 32> keccak256(std::string_view text) {
  return keccak256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::optional<Address> Address::parse(std::string_view text) {
  if (text.size() != 42 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    return std::nullopt;
  }
  std::array<std::uint8_t, 20> bytes{};
  for (std::size_t i = 0; i < 20; ++i) {
    int hi = hex_value(text[2 + 2 * i]);
    int lo = hex_value(text[3 + 2 * i]);
    if (hi < 0 || lo < 0) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return Address(bytes);
}

Address Address::derive(std::string_view seed) {
  auto digest = keccak256(seed);
  std::array<std::uint8_t, 20> bytes{};
  std::memcpy(bytes.data(), digest.data() + 12, 20);
  return Address(bytes);
}

bool Address::is_zero() const {
  for (auto b : bytes_) {
    if (b != 0) return false;
  }
  return true;
}

std::string Address::to_lower() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out = "0x";
  for (auto b : bytes_) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::string Address::to_checksum() const {
  std::string lower = to_lower();
  auto digest = keccak256(std::string_view(lower).substr(2));
  for (std::size_t i = 0; i < 40; ++i) {
    char& c = lower[2 + i];
    if (c < 'a') continue;
    unsigned nibble = (i % 2 == 0) ? (digest[i / 2] >> 4) : (digest[i / 2] & 0xF);
    if (nibble >= 8) c = static_cast<char>(c - 'a' + 'A');
  }
  return lower;
}

}  // namespace procforge
