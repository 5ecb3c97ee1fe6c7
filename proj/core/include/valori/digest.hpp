#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace valori {

// SHA-256 digest; rendered as 64 lowercase hex characters.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static std::optional<Digest> from_hex(std::string_view hex);

  friend bool operator==(const Digest&, const Digest&) = default;
};

Digest sha256(std::span<const std::uint8_t> data);

}  // namespace valori
