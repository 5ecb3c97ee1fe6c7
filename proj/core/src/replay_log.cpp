#include "valori/replay_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <string>
#include <utility>

#include "valori/error.hpp"
#include "valori/snapshot.hpp"

namespace valori::replay {

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < data.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - off, 1u << 30));
    crc = ::crc32(crc, data.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

void put_config(ByteWriter& w, const KernelConfig& c) {
  w.put_u8(static_cast<std::uint8_t>(c.precision));
  w.put_u32(c.dim);
  w.put_u32(c.hnsw.m);
  w.put_u32(c.hnsw.ef_construction);
  w.put_u32(c.hnsw.ef_search);
}

void put_payload(ByteWriter& w, const Command& cmd) {
  std::visit(
      [&w](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, InsertCmd>) {
          w.put_u64(c.id);
          w.put_u32(static_cast<std::uint32_t>(c.coords.dim()));
          for (Fixed32 x : c.coords.coords()) w.put_i32(x.raw);
          w.put_u32(static_cast<std::uint32_t>(c.metadata.size()));
          w.put_bytes(c.metadata);
        } else if constexpr (std::is_same_v<T, DeleteCmd>) {
          w.put_u64(c.id);
        } else {
          w.put_u64(c.a);
          w.put_u64(c.b);
        }
      },
      cmd);
}

[[noreturn]] void bad_record(std::uint64_t index, const std::string& what) {
  throw Error(Errc::kCorruptRecord,
              "record " + std::to_string(index) + ": " + what, index, "record");
}

Command decode_payload(std::uint64_t index, std::uint8_t opcode,
                       std::span<const std::uint8_t> payload) {
  ByteReader r(payload, Errc::kCorruptRecord, "record");
  Command cmd;
  try {
    switch (opcode) {
      case static_cast<std::uint8_t>(Opcode::kInsert): {
        InsertCmd ins;
        ins.id = r.get_u64();
        const std::uint32_t dim = r.get_u32();
        if (dim > kMaxDim || std::uint64_t{dim} * 4 > r.remaining()) {
          bad_record(index, "insert dimension does not fit payload");
        }
        std::vector<std::int32_t> raw(dim);
        for (auto& x : raw) x = r.get_i32();
        ins.coords = FixedVector::from_raw(raw);
        const std::uint32_t len = r.get_u32();
        auto meta = r.get_bytes(len);
        ins.metadata.assign(meta.begin(), meta.end());
        cmd = std::move(ins);
        break;
      }
      case static_cast<std::uint8_t>(Opcode::kDelete):
        cmd = DeleteCmd{r.get_u64()};
        break;
      case static_cast<std::uint8_t>(Opcode::kLink): {
        const VectorId a = r.get_u64();
        const VectorId b = r.get_u64();
        cmd = LinkCmd{a, b};
        break;
      }
      default:
        bad_record(index, "unknown opcode " + std::to_string(opcode));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::kCorruptRecord && e.position() == index) throw;
    bad_record(index, "payload truncated");
  }
  if (!r.at_end()) bad_record(index, "payload longer than its opcode requires");
  return cmd;
}

KernelConfig read_header(ByteReader& r, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(Errc::kBadMagic, "not a VKL1 log", 0, "header");
  }
  r.get_bytes(kMagic.size());
  const std::uint16_t version = r.get_u16();
  if (version != kVersion) {
    throw Error(Errc::kUnsupportedVersion, "log version " + std::to_string(version), 4,
                "header");
  }
  const std::uint8_t precision = r.get_u8();
  if (precision != static_cast<std::uint8_t>(PrecisionContract::kQ16_16)) {
    throw Error(Errc::kUnsupportedPrecision,
                "precision tag " + std::to_string(precision), 6, "header");
  }
  KernelConfig c;
  c.precision = PrecisionContract::kQ16_16;
  c.dim = r.get_u32();
  c.hnsw.m = r.get_u32();
  c.hnsw.ef_construction = r.get_u32();
  c.hnsw.ef_search = r.get_u32();
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(Errc::kCorruptSection, std::string("log header: ") + e.what(), 7,
                "header");
  }
  return c;
}

}  // namespace

std::size_t payload_size(const Command& cmd) {
  if (const auto* ins = std::get_if<InsertCmd>(&cmd)) {
    return 8 + 4 + 4 * ins->coords.dim() + 4 + ins->metadata.size();
  }
  if (std::holds_alternative<DeleteCmd>(cmd)) return 8;
  return 16;
}

Bytes encode_header(const KernelConfig& config) {
  ByteWriter w;
  for (char c : kMagic) w.put_u8(static_cast<std::uint8_t>(c));
  w.put_u16(kVersion);
  put_config(w, config);
  return std::move(w).take();
}

Bytes encode_record(const Command& cmd) {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(payload_size(cmd)));
  w.put_u8(static_cast<std::uint8_t>(opcode_of(cmd)));
  put_payload(w, cmd);
  const auto& b = w.bytes();
  w.put_u32(crc32(std::span(b).subspan(4)));
  return std::move(w).take();
}

LogContents parse_log(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::kCorruptSection, "header");
  LogContents log;
  log.config = read_header(r, bytes);

  std::uint64_t index = 0;
  while (!r.at_end()) {
    if (r.remaining() < kRecordOverhead) bad_record(index, "torn record header");
    const std::uint32_t length = r.get_u32();
    if (std::uint64_t{length} + 1 + 4 > r.remaining()) {
      bad_record(index, "length " + std::to_string(length) + " runs past end of log");
    }
    const auto covered = r.get_bytes(1 + length);
    const std::uint32_t stored_crc = r.get_u32();
    if (crc32(covered) != stored_crc) bad_record(index, "CRC mismatch");
    log.commands.push_back(decode_payload(index, covered[0], covered.subspan(1)));
    ++index;
  }
  return log;
}

LogContents read_log_file(const std::filesystem::path& path) {
  return parse_log(snapshot::read_file(path));
}

LogWriter::LogWriter(int fd, std::filesystem::path path, SyncPolicy policy,
                     std::size_t batch_size, std::uint64_t records)
    : fd_(fd),
      path_(std::move(path)),
      policy_(policy),
      batch_size_(batch_size == 0 ? 1 : batch_size),
      records_(records) {}

LogWriter LogWriter::create(const std::filesystem::path& path,
                            const KernelConfig& config, SyncPolicy policy,
                            std::size_t batch_size) {
  config.validate();
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(Errc::kIoFailure, "create " + path.string() + ": " + std::strerror(errno));
  }
  LogWriter w(fd, path, policy, batch_size, 0);
  w.write_all(encode_header(config));
  ::fsync(fd);
  return w;
}

LogWriter LogWriter::open(const std::filesystem::path& path,
                          const KernelConfig& config, SyncPolicy policy,
                          std::size_t batch_size) {
  const LogContents existing = read_log_file(path);
  if (!(existing.config == config)) {
    throw Error(Errc::kConfigMismatch, "log " + path.string() +
                                           " was written with a different kernel config");
  }
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
  if (fd < 0) {
    throw Error(Errc::kIoFailure, "open " + path.string() + ": " + std::strerror(errno));
  }
  return LogWriter(fd, path, policy, batch_size, existing.commands.size());
}

LogWriter::LogWriter(LogWriter&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      path_(std::move(other.path_)),
      policy_(other.policy_),
      batch_size_(other.batch_size_),
      unsynced_(other.unsynced_),
      records_(other.records_) {}

LogWriter& LogWriter::operator=(LogWriter&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    path_ = std::move(other.path_);
    policy_ = other.policy_;
    batch_size_ = other.batch_size_;
    unsynced_ = other.unsynced_;
    records_ = other.records_;
  }
  return *this;
}

LogWriter::~LogWriter() { close(); }

void LogWriter::close() noexcept {
  if (fd_ >= 0) {
    if (unsynced_ > 0) ::fsync(fd_);
    ::close(fd_);
    fd_ = -1;
  }
}

void LogWriter::write_all(std::span<const std::uint8_t> data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kIoFailure, "write " + path_.string() + ": " + std::strerror(errno));
    }
    data = data.subspan(static_cast<std::size_t>(n));
  }
}

void LogWriter::append(const Command& cmd) {
  if (fd_ < 0) throw Error(Errc::kIoFailure, "log writer is closed");
  write_all(encode_record(cmd));
  ++records_;
  ++unsynced_;
  if (policy_ == SyncPolicy::kPerRecord || unsynced_ >= batch_size_) sync();
}

void LogWriter::sync() {
  if (fd_ < 0 || unsynced_ == 0) return;
  if (::fsync(fd_) != 0) {
    throw Error(Errc::kIoFailure, "fsync " + path_.string() + ": " + std::strerror(errno));
  }
  unsynced_ = 0;
}

ReplayResult replay(const LogContents& log, std::optional<KernelState> initial,
                    std::size_t first_record) {
  if (initial && !(initial->config() == log.config)) {
    throw Error(Errc::kConfigMismatch, "initial state config differs from log header");
  }
  if (first_record > log.commands.size()) {
    throw Error(Errc::kInvalidArgument, "first_record beyond end of log");
  }
  KernelState state = initial ? std::move(*initial) : KernelState(log.config);
  std::uint64_t applied = 0;
  for (std::size_t i = first_record; i < log.commands.size(); ++i) {
    try {
      state.apply(log.commands[i]);
    } catch (const Error& e) {
      throw Error(Errc::kReplayDivergence,
                  "record " + std::to_string(i) + " rejected: " + e.what(), i,
                  "record");
    }
    ++applied;
  }
  Digest hash = state_hash(state);
  return {std::move(state), hash, applied};
}

VerifyReport verify(const LogContents& log, const Digest& expected,
                    std::optional<KernelState> initial) {
  ReplayResult r = replay(log, std::move(initial));
  VerifyReport report;
  report.expected = expected;
  report.actual = r.hash;
  report.pass = r.hash == expected;
  report.record_count = log.commands.size();
  report.clock = r.state.clock();
  return report;
}

}  // namespace valori::replay
