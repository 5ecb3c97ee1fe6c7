#pragma once

// Builders for the committed files under tests/fixtures. The fixture test
// regenerates each one in memory and compares it byte for byte with the
// committed copy; make_fixtures writes them.

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "valori/replay_log.hpp"
#include "valori/snapshot.hpp"

namespace valori::testing {

inline KernelConfig golden_log_config() {
  KernelConfig c;
  c.dim = 4;
  c.hnsw = {4, 16, 8};
  return c;
}

inline std::vector<Command> golden_log_commands() {
  Rng rng(0x5eed);
  return random_log(rng, golden_log_config(), 40, LogMix{70, 15}, 4 * 65536);
}

inline Bytes golden_log_bytes() {
  Bytes out = replay::encode_header(golden_log_config());
  for (const auto& c : golden_log_commands()) {
    const Bytes rec = replay::encode_record(c);
    out.insert(out.end(), rec.begin(), rec.end());
  }
  return out;
}

inline Bytes empty_snapshot_bytes() { return snapshot::serialize(KernelState{KernelConfig{}}); }

// Ten 4-dim vectors on a small integer grid, ids 1..10, plus one metadata
// blob. Used by the CLI query golden output.
inline KernelConfig ten_config() {
  KernelConfig c;
  c.dim = 4;
  c.hnsw = {4, 16, 8};
  return c;
}

inline KernelState ten_state() {
  KernelState s(ten_config());
  const std::int32_t grid[10][4] = {
      {0, 0, 0, 0},  {1, 0, 0, 0},  {0, 2, 0, 0},   {0, 0, 3, 0},  {1, 1, 1, 1},
      {-1, 0, 2, 0}, {2, -2, 0, 1}, {0, 0, -1, -1}, {3, 3, 0, 0},  {-2, 1, 1, -3}};
  for (VectorId i = 0; i < 10; ++i) {
    std::vector<std::int32_t> raw(4);
    for (int d = 0; d < 4; ++d) raw[d] = grid[i][d] * 65536 / 2;
    Bytes meta;
    if (i == 4) meta = {'f', 'i', 'v', 'e'};
    s.apply(InsertCmd{i + 1, FixedVector::from_raw(raw), meta});
  }
  return s;
}

inline Bytes ten_snapshot_bytes() { return snapshot::serialize(ten_state()); }

// The five x86 float32 bit patterns of an embedding prefix, stored as a
// 1x5 float32 NPY (format v1.0, C order).
inline constexpr std::uint32_t kPrefixBits[5] = {0xbd8276f8, 0x3d6bb481, 0x3d1dcdf1,
                                                 0xbd601d21, 0x3b761ffb};

inline Bytes npy_f32(const std::vector<std::vector<float>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                       std::to_string(rows.size()) + ", " + std::to_string(cols) + "), }";
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  ByteWriter w;
  w.put_u8(0x93);
  for (char c : std::string_view("NUMPY")) w.put_u8(static_cast<std::uint8_t>(c));
  w.put_u8(1);
  w.put_u8(0);
  w.put_u16(static_cast<std::uint16_t>(header.size()));
  for (char c : header) w.put_u8(static_cast<std::uint8_t>(c));
  for (const auto& row : rows) {
    for (float f : row) w.put_u32(std::bit_cast<std::uint32_t>(f));
  }
  return std::move(w).take();
}

// Five hand-written commands on a 2-dim config. Small enough to print in
// full in the format documents.
inline KernelConfig tiny_config() {
  KernelConfig c;
  c.dim = 2;
  c.hnsw = {2, 4, 4};
  return c;
}

inline std::vector<Command> tiny_log_commands() {
  return {
      InsertCmd{7, FixedVector::from_raw({65536, -32768}), {'h', 'i'}},
      InsertCmd{9, FixedVector::from_raw({0, 16384}), {}},
      InsertCmd{12, FixedVector::from_raw({-131072, 1}), {}},
      LinkCmd{9, 7},
      DeleteCmd{12},
  };
}

inline Bytes tiny_log_bytes() {
  Bytes out = replay::encode_header(tiny_config());
  for (const auto& c : tiny_log_commands()) {
    const Bytes rec = replay::encode_record(c);
    out.insert(out.end(), rec.begin(), rec.end());
  }
  return out;
}

inline Bytes tiny_snapshot_bytes() {
  return snapshot::serialize(replay_commands(tiny_config(), tiny_log_commands()));
}

inline Bytes prefix_npy_bytes() {
  std::vector<float> row;
  for (std::uint32_t b : kPrefixBits) row.push_back(std::bit_cast<float>(b));
  return npy_f32({row});
}

struct FixtureFile {
  const char* name;
  Bytes (*build)();
};

inline const std::vector<FixtureFile>& fixture_files() {
  static const std::vector<FixtureFile> files = {
      {"empty.vks", empty_snapshot_bytes},
      {"golden.vkl", golden_log_bytes},
      {"ten.vks", ten_snapshot_bytes},
      {"prefix_x86.npy", prefix_npy_bytes},
      {"tiny.vkl", tiny_log_bytes},
      {"tiny.vks", tiny_snapshot_bytes},
  };
  return files;
}

}  // namespace valori::testing
