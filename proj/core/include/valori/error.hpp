#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace valori {

enum class Errc {
  kInvalidArgument,
  kNonFiniteInput,
  kDimensionMismatch,
  kDuplicateId,
  kUnknownId,
  kSelfLink,
  kMetadataTooLarge,
  kUnimplemented,
  kDuplicateNode,
  kUnknownNode,
  kBadMagic,
  kUnsupportedVersion,
  kUnsupportedPrecision,
  kCorruptSection,
  kIntegrityViolation,
  kIoFailure,
  kConfigMismatch,
  kCorruptRecord,
  kReplayDivergence,
  kParseError,
};

std::string_view errc_name(Errc code);

// Every failure inside the library is reported as an Error. `position` is a
// byte offset for snapshot errors and a record index for log errors.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Error(Errc code, const std::string& message, std::uint64_t position,
        std::string section = {});

  Errc code() const noexcept { return code_; }
  const std::optional<std::uint64_t>& position() const noexcept {
    return position_;
  }
  const std::string& section() const noexcept { return section_; }

 private:
  Errc code_;
  std::optional<std::uint64_t> position_;
  std::string section_;
};

}  // namespace valori
