#include "valori/error.hpp"

#include <utility>

namespace valori {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kNonFiniteInput: return "NonFiniteInput";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kDuplicateId: return "DuplicateId";
    case Errc::kUnknownId: return "UnknownId";
    case Errc::kSelfLink: return "SelfLink";
    case Errc::kMetadataTooLarge: return "MetadataTooLarge";
    case Errc::kUnimplemented: return "Unimplemented";
    case Errc::kDuplicateNode: return "DuplicateNode";
    case Errc::kUnknownNode: return "UnknownNode";
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kUnsupportedVersion: return "UnsupportedVersion";
    case Errc::kUnsupportedPrecision: return "UnsupportedPrecision";
    case Errc::kCorruptSection: return "CorruptSection";
    case Errc::kIntegrityViolation: return "IntegrityViolation";
    case Errc::kIoFailure: return "IoFailure";
    case Errc::kConfigMismatch: return "ConfigMismatch";
    case Errc::kCorruptRecord: return "CorruptRecord";
    case Errc::kReplayDivergence: return "ReplayDivergence";
    case Errc::kParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

std::string format(Errc code, const std::string& message) {
  std::string out(errc_name(code));
  if (!message.empty()) {
    out += ": ";
    out += message;
  }
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(format(code, message)), code_(code) {}

Error::Error(Errc code, const std::string& message, std::uint64_t position,
             std::string section)
    : std::runtime_error(format(code, message)),
      code_(code),
      position_(position),
      section_(std::move(section)) {}

}  // namespace valori
