#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace procforge {

/// Keccak-256 as used by Ethereum (original padding, not FIPS-202 SHA3).
std::array<std::uint8_t, 32> keccak256(std::span<const std::uint8_t> data);
std::array<std::uint8_t, 32> keccak256(std::string_view text);

/// 20-byte account or contract address.
class Address {
 public:
  constexpr Address() = default;
  explicit Address(const std::array<std::uint8_t, 20>& bytes) : bytes_(bytes) {}

  /// Accepts `0x` followed by exactly 40 hex digits, any case.
  static std::optional<Address> parse(std::string_view text);

  /// Last 20 bytes of keccak256(seed). Used for simulated identities.
  static Address derive(std::string_view seed);

  [[nodiscard]] bool is_zero() const;

  /// Mixed-case checksum rendering (EIP-55), required by solc for literals.
  [[nodiscard]] std::string to_checksum() const;
  [[nodiscard]] std::string to_lower() const;

  [[nodiscard]] const std::array<std::uint8_t, 20>& bytes() const { return bytes_; }

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;

 private:
  std::array<std::uint8_t, 20> bytes_{};
};

}  // namespace procforge
