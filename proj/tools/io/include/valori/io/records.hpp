#pragma once

// Batch ingestion inputs. Text coordinates are parsed as double (correctly
// rounded) and quantized once with from_float(double); NPY float32 values
// widen to double exactly, so they quantize as if converted from float.

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "valori/io/npy.hpp"
#include "valori/kernel.hpp"

namespace valori::io {

struct InputRecord {
  VectorId id = 0;
  std::vector<double> coords;
  Bytes metadata;
  std::size_t line = 0;  // 1-based source line, 0 for NPY rows
};

enum class InputFormat { kCsv, kJsonl, kNpy };

InputFormat format_from_path(const std::filesystem::path& path);

// CSV: "id,x0,x1,..." per line. An optional header line is recognised by a
// non-numeric first field; if its last column is named "metadata" every row
// carries base64 metadata in that column. Blank lines and lines starting
// with '#' are skipped.
std::vector<InputRecord> parse_csv(std::string_view text);

// JSON lines: {"id": u64, "vector": [numbers], "metadata": "base64"?}.
std::vector<InputRecord> parse_jsonl(std::string_view text);

// NPY rows become ids 0..rows-1 in row order.
std::vector<InputRecord> from_npy(const NpyArray& array);

std::vector<InputRecord> load_records(const std::filesystem::path& path,
                                      InputFormat format);

// Sorts by id, rejects duplicate ids and inconsistent dimensions, and
// quantizes at the boundary. NonFiniteInput names the id and coordinate.
std::vector<InsertCmd> to_insert_commands(std::vector<InputRecord> records,
                                          std::uint32_t dim);

// "0.5, -1, 2e-3" → doubles. Used for query vectors given on the command
// line and for plain float CSV rows.
std::vector<double> parse_float_list(std::string_view text, std::size_t line = 0);

// Quantizes a query vector; NonFiniteInput names the coordinate.
FixedVector quantize(std::span<const double> coords);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace valori::io
