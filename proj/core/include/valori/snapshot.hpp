#pragma once

// Canonical snapshot format (.vks). Layout, all integers little-endian:
//
//   header   magic "VKS1" | version u16 | precision u8 | dim u32 | M u32
//            | ef_construction u32 | ef_search u32 | clock u64
//            | section_count u32
//   section  id u8 | body_length u64 | body      (ids 1..5, fixed order)
//     1 vectors     count u32, then per id ascending: id u64, dim x i32
//     2 metadata    count u32, then per id ascending: id u64, len u32, bytes
//     3 links       count u32, then pairs ascending: a u64, b u64 (a < b)
//     4 tombstones  count u32, then ids ascending: u64
//     5 graph       has_entry u8, entry u64, max_level u32, then for each
//                   layer 0..max_level (none when empty): node_count u32,
//                   per node ascending: id u64, degree u32, neighbours u64
//
// serialize() is injective on valid states and deserialize() rejects every
// byte sequence that serialize() could not have produced.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

#include "valori/bytes.hpp"
#include "valori/digest.hpp"
#include "valori/kernel.hpp"

namespace valori::snapshot {

inline constexpr std::string_view kMagic = "VKS1";
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint32_t kSectionCount = 5;
inline constexpr std::size_t kHeaderSize = 35;

Bytes serialize(const KernelState& state);

// Throws Error with kBadMagic, kUnsupportedVersion, kUnsupportedPrecision,
// kCorruptSection (section name and byte offset attached) or
// kIntegrityViolation.
KernelState deserialize(std::span<const std::uint8_t> bytes);

Digest content_hash(std::span<const std::uint8_t> bytes);

// File helpers; throw Error(kIoFailure) on filesystem errors.
Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

}  // namespace valori::snapshot
