#pragma once

#include <span>
#include <string>
#include <string_view>

#include "valori/bytes.hpp"

namespace valori::io {

// Standard alphabet with '=' padding. Decoding is strict: any length that is
// not a multiple of four, foreign character or misplaced padding throws
// Error(kParseError).
std::string base64_encode(std::span<const std::uint8_t> bytes);
Bytes base64_decode(std::string_view text);

}  // namespace valori::io
