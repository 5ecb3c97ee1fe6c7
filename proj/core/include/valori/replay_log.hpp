#pragma once

// Append-only command log (.vkl) and the replay engine.
//
//   file    magic "VKL1" | version u16 | precision u8 | dim u32 | M u32
//           | ef_construction u32 | ef_search u32 | record*
//   record  length u32 | opcode u8 | payload[length] | crc32 u32
//
// `length` counts payload bytes only; the CRC-32 (IEEE, zlib polynomial)
// covers opcode and payload. Payloads:
//   insert  id u64 | dim u32 | dim x i32 | meta_len u32 | meta
//   delete  id u64
//   link    a u64 | b u64
// The log only ever holds commands the kernel accepted.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "valori/bytes.hpp"
#include "valori/digest.hpp"
#include "valori/kernel.hpp"

namespace valori::replay {

inline constexpr std::string_view kMagic = "VKL1";
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 23;
inline constexpr std::size_t kRecordOverhead = 4 + 1 + 4;

std::uint32_t crc32(std::span<const std::uint8_t> data);

Bytes encode_header(const KernelConfig& config);
Bytes encode_record(const Command& cmd);
std::size_t payload_size(const Command& cmd);

struct LogContents {
  KernelConfig config;
  std::vector<Command> commands;
};

// Throws kBadMagic / kUnsupportedVersion / kUnsupportedPrecision for a bad
// header and kCorruptRecord (position = record index) for any framing, CRC or
// payload error, including a torn final record.
LogContents parse_log(std::span<const std::uint8_t> bytes);
LogContents read_log_file(const std::filesystem::path& path);

enum class SyncPolicy {
  kPerRecord,  // fsync after every append
  kBatched,    // fsync every `batch_size` appends and on sync()/close
};

// Single appender. Records are written with one write() each; durability
// follows the SyncPolicy and does not affect log contents.
class LogWriter {
 public:
  // Creates (truncating) a new log containing only the header.
  static LogWriter create(const std::filesystem::path& path,
                          const KernelConfig& config,
                          SyncPolicy policy = SyncPolicy::kPerRecord,
                          std::size_t batch_size = 64);

  // Opens an existing log for appending after validating every record and
  // that its header matches `config`. Throws kConfigMismatch.
  static LogWriter open(const std::filesystem::path& path,
                        const KernelConfig& config,
                        SyncPolicy policy = SyncPolicy::kPerRecord,
                        std::size_t batch_size = 64);

  LogWriter(LogWriter&& other) noexcept;
  LogWriter& operator=(LogWriter&& other) noexcept;
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;
  ~LogWriter();

  void append(const Command& cmd);
  void sync();

  std::uint64_t record_count() const noexcept { return records_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  LogWriter(int fd, std::filesystem::path path, SyncPolicy policy,
            std::size_t batch_size, std::uint64_t records);
  void write_all(std::span<const std::uint8_t> data);
  void close() noexcept;

  int fd_ = -1;
  std::filesystem::path path_;
  SyncPolicy policy_;
  std::size_t batch_size_;
  std::size_t unsynced_ = 0;
  std::uint64_t records_ = 0;
};

struct ReplayResult {
  KernelState state;
  Digest hash;
  std::uint64_t records_applied = 0;
};

// Applies log.commands[first_record..] in order to `initial` (or to an empty
// state built from the log's config). Throws kConfigMismatch if the initial
// state was built with a different config and kReplayDivergence (position =
// record index) if the kernel rejects a logged command.
ReplayResult replay(const LogContents& log,
                    std::optional<KernelState> initial = std::nullopt,
                    std::size_t first_record = 0);

struct VerifyReport {
  bool pass = false;
  Digest expected;
  Digest actual;
  std::uint64_t record_count = 0;
  std::uint64_t clock = 0;
};

VerifyReport verify(const LogContents& log, const Digest& expected,
                    std::optional<KernelState> initial = std::nullopt);

}  // namespace valori::replay
