#pragma once

// Reader for the subset of the NumPy .npy format produced by embedding
// pipelines: format versions 1-3, little-endian float32/float64, C order,
// 1-D (treated as one row) or 2-D.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "valori/bytes.hpp"

namespace valori::io {

enum class NpyDtype { kF32, kF64 };

struct NpyArray {
  NpyDtype dtype = NpyDtype::kF32;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Bytes data;  // rows * cols elements, little-endian

  std::size_t element_size() const { return dtype == NpyDtype::kF32 ? 4 : 8; }
  // Raw IEEE-754 bits of element (r, c), zero-extended for float32.
  std::uint64_t bits(std::size_t r, std::size_t c) const;
  // Exact value of element (r, c); float32 widens without rounding.
  double value(std::size_t r, std::size_t c) const;
};

NpyArray parse_npy(std::span<const std::uint8_t> bytes);
NpyArray load_npy(const std::filesystem::path& path);

}  // namespace valori::io
