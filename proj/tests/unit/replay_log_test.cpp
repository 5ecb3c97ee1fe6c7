#include "valori/replay_log.hpp"

#include <gtest/gtest.h>
#include <zlib.h>

#include <filesystem>

#include "fixtures.hpp"
#include "golden.hpp"
#include "test_support.hpp"
#include "valori/error.hpp"

namespace valori {
namespace {

using testing::Rng;
namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("valori_log_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const char* name) const { return path_ / name; }

 private:
  fs::path path_;
};

Bytes concat_log(const KernelConfig& cfg, const std::vector<Command>& cmds) {
  Bytes out = replay::encode_header(cfg);
  for (const auto& c : cmds) {
    const Bytes r = replay::encode_record(c);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

TEST(Crc32, KnownCheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(replay::crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}),
            0xcbf43926u);
}

TEST(Record, InsertPayloadLength) {
  Rng rng(1);
  for (std::size_t meta_len : {0u, 1u, 17u}) {
    const InsertCmd cmd{5, testing::random_fixed(rng, 384), Bytes(meta_len, 0xab)};
    EXPECT_EQ(replay::payload_size(cmd), 8 + 4 + 384 * 4 + 4 + meta_len);
    EXPECT_EQ(replay::encode_record(cmd).size(),
              replay::kRecordOverhead + 8 + 4 + 384 * 4 + 4 + meta_len);
  }
  EXPECT_EQ(replay::payload_size(DeleteCmd{1}), 8u);
  EXPECT_EQ(replay::payload_size(LinkCmd{1, 2}), 16u);
}

TEST(Record, DeleteBytes) {
  const Bytes r = replay::encode_record(DeleteCmd{0x0102030405060708ULL});
  const Bytes body = {2, 8, 7, 6, 5, 4, 3, 2, 1};
  const std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0, body.data(), 9));
  const Bytes expect = {8, 0, 0, 0, 2, 8, 7, 6, 5, 4, 3, 2, 1,
                        static_cast<std::uint8_t>(crc), static_cast<std::uint8_t>(crc >> 8),
                        static_cast<std::uint8_t>(crc >> 16),
                        static_cast<std::uint8_t>(crc >> 24)};
  EXPECT_EQ(r, expect);
}

TEST(Header, Layout) {
  KernelConfig c;
  c.dim = 384;
  const Bytes h = replay::encode_header(c);
  ASSERT_EQ(h.size(), replay::kHeaderSize);
  const Bytes expect = {'V', 'K', 'L', '1', 1, 0, 1, 0x80, 1, 0, 0, 16, 0, 0, 0,
                        128, 0, 0, 0, 64, 0, 0, 0};
  EXPECT_EQ(h, expect);
}

TEST(Parse, RoundTripsCommandBits) {
  Rng rng(2);
  KernelConfig cfg;
  cfg.dim = 7;
  const auto cmds = testing::random_log(rng, cfg, 300);
  const auto parsed = replay::parse_log(concat_log(cfg, cmds));
  EXPECT_EQ(parsed.config, cfg);
  EXPECT_EQ(parsed.commands, cmds);
}

TEST(Parse, BadMagicAndVersion) {
  Bytes b = replay::encode_header(KernelConfig{});
  b[3] = '2';
  try {
    replay::parse_log(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kBadMagic);
  }
  b = replay::encode_header(KernelConfig{});
  b[4] = 7;
  try {
    replay::parse_log(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnsupportedVersion);
  }
}

TEST(Parse, TornTailReportsRecordIndex) {
  Rng rng(3);
  KernelConfig cfg;
  cfg.dim = 3;
  const auto cmds = testing::random_log(rng, cfg, 5);
  const Bytes full = concat_log(cfg, cmds);
  const std::size_t last_start = full.size() - replay::encode_record(cmds.back()).size();
  for (std::size_t len = last_start + 1; len < full.size(); ++len) {
    try {
      replay::parse_log({full.data(), len});
      FAIL() << len;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kCorruptRecord);
      EXPECT_EQ(e.position(), std::optional<std::uint64_t>(4));
    }
  }
}

TEST(Parse, CrcMismatch) {
  Bytes b = concat_log(KernelConfig{}, {DeleteCmd{3}, DeleteCmd{4}});
  b[replay::kHeaderSize + 13 + 6] ^= 0x10;  // inside the second record's id
  try {
    replay::parse_log(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kCorruptRecord);
    EXPECT_EQ(e.position(), std::optional<std::uint64_t>(1));
  }
}

TEST(Writer, AppendThenRead) {
  TempDir dir;
  Rng rng(4);
  KernelConfig cfg;
  cfg.dim = 5;
  const auto cmds = testing::random_log(rng, cfg, 3);
  {
    auto w = replay::LogWriter::create(dir / "a.vkl", cfg);
    for (const auto& c : cmds) w.append(c);
    EXPECT_EQ(w.record_count(), 3u);
  }
  const auto back = replay::read_log_file(dir / "a.vkl");
  EXPECT_EQ(back.commands, cmds);
}

TEST(Writer, ReopenAppendsAndChecksConfig) {
  TempDir dir;
  KernelConfig cfg;
  cfg.dim = 2;
  {
    auto w = replay::LogWriter::create(dir / "b.vkl", cfg, replay::SyncPolicy::kBatched, 2);
    w.append(InsertCmd{1, FixedVector::from_raw({1, 2}), {}});
  }
  {
    auto w = replay::LogWriter::open(dir / "b.vkl", cfg);
    EXPECT_EQ(w.record_count(), 1u);
    w.append(DeleteCmd{1});
  }
  EXPECT_EQ(replay::read_log_file(dir / "b.vkl").commands.size(), 2u);

  KernelConfig other = cfg;
  other.hnsw.m = 5;
  try {
    replay::LogWriter::open(dir / "b.vkl", other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kConfigMismatch);
  }
}

TEST(Writer, CreateRefusesExisting) {
  TempDir dir;
  { auto w = replay::LogWriter::create(dir / "c.vkl", KernelConfig{}); }
  EXPECT_THROW(replay::LogWriter::create(dir / "c.vkl", KernelConfig{}), Error);
}

TEST(Replay, EmptyLogGivesGoldenHash) {
  const auto r = replay::replay(replay::parse_log(replay::encode_header(KernelConfig{})));
  EXPECT_EQ(r.hash.hex(), VALORI_GOLDEN_EMPTY_HASH);
  EXPECT_EQ(r.records_applied, 0u);
}

TEST(Replay, GoldenLogFixture) {
  const auto log = replay::read_log_file(fs::path(VALORI_FIXTURE_DIR) / "golden.vkl");
  EXPECT_EQ(log.commands.size(), 40u);
  const auto a = replay::replay(log);
  const auto b = replay::replay(log);
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_EQ(a.hash.hex(), VALORI_GOLDEN_LOG_HASH);
}

TEST(Replay, ConfigMismatchRefusesToStart) {
  KernelConfig a;
  a.dim = 3;
  KernelConfig b = a;
  b.hnsw.ef_search = 9;
  const auto log = replay::parse_log(replay::encode_header(a));
  try {
    replay::replay(log, KernelState(b));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kConfigMismatch);
  }
}

TEST(Replay, DivergenceReportsIndex) {
  KernelConfig cfg;
  cfg.dim = 1;
  replay::LogContents log{cfg,
                          {InsertCmd{1, FixedVector::from_raw({1}), {}}, DeleteCmd{1},
                           DeleteCmd{1}}};
  try {
    replay::replay(log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kReplayDivergence);
    EXPECT_EQ(e.position(), std::optional<std::uint64_t>(2));
  }
}

TEST(Replay, SnapshotPlusTailEqualsFull) {
  Rng rng(6);
  KernelConfig cfg;
  cfg.dim = 6;
  cfg.hnsw = {4, 16, 8};
  const auto cmds = testing::random_log(rng, cfg, 500);
  const replay::LogContents log{cfg, cmds};
  const auto full = replay::replay(log);
  for (int i = 0; i < 10; ++i) {
    const std::size_t cut = rng.below(cmds.size() + 1);
    const auto head = replay::replay({cfg, {cmds.begin(), cmds.begin() + cut}});
    KernelState restored = snapshot::deserialize(snapshot::serialize(head.state));
    const auto tail = replay::replay(log, std::move(restored), cut);
    ASSERT_EQ(tail.hash, full.hash) << "cut " << cut;
    EXPECT_EQ(tail.records_applied, cmds.size() - cut);
  }
}

TEST(Verify, MatchAndMismatch) {
  const auto log = replay::read_log_file(fs::path(VALORI_FIXTURE_DIR) / "golden.vkl");
  const auto good = replay::verify(log, *Digest::from_hex(VALORI_GOLDEN_LOG_HASH));
  EXPECT_TRUE(good.pass);
  EXPECT_EQ(good.record_count, 40u);
  EXPECT_EQ(good.clock, 40u);
  const auto bad = replay::verify(log, *Digest::from_hex(VALORI_GOLDEN_EMPTY_HASH));
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(bad.actual.hex(), VALORI_GOLDEN_LOG_HASH);
}

TEST(Tamper, EveryBitFlipInRecordsIsCaught) {
  const Bytes base = snapshot::read_file(fs::path(VALORI_FIXTURE_DIR) / "golden.vkl");
  const Digest golden = *Digest::from_hex(VALORI_GOLDEN_LOG_HASH);
  for (std::size_t bit = replay::kHeaderSize * 8; bit < base.size() * 8; ++bit) {
    Bytes b = base;
    b[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    bool caught = false;
    try {
      caught = replay::replay(replay::parse_log(b)).hash != golden;
    } catch (const Error&) {
      caught = true;
    }
    ASSERT_TRUE(caught) << "bit " << bit;
  }
}

}  // namespace
}  // namespace valori
