#include "valori/io/base64.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>

#include "valori/error.hpp"

namespace valori::io {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  if (!bytes.empty()) {
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw Error(Errc::kParseError, "base64 length " + std::to_string(text.size()) +
                                       " is not a multiple of 4");
  }
  const std::size_t pad = text.ends_with("==") ? 2 : text.ends_with("=") ? 1 : 0;
  if (std::find(text.begin(), text.end() - static_cast<std::ptrdiff_t>(pad), '=') !=
      text.end() - static_cast<std::ptrdiff_t>(pad)) {
    throw Error(Errc::kParseError, "base64 padding in the middle of the input");
  }
  Bytes out(text.size() / 4 * 3);
  if (text.empty()) return out;
  // EVP_DecodeBlock skips leading/trailing whitespace; reject it up front.
  if (std::isspace(static_cast<unsigned char>(text.front())) ||
      std::isspace(static_cast<unsigned char>(text.back()))) {
    throw Error(Errc::kParseError, "whitespace in base64 input");
  }
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(Errc::kParseError, "invalid base64 character");
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace valori::io
