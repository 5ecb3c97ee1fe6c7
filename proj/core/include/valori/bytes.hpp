#pragma once

// Little-endian byte encoding shared by the snapshot and log formats.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "valori/error.hpp"

namespace valori {

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u16(std::uint16_t v) { put_le(v, 2); }
  void put_u32(std::uint32_t v) { put_le(v, 4); }
  void put_u64(std::uint64_t v) { put_le(v, 8); }
  void put_i32(std::int32_t v) { put_u32(static_cast<std::uint32_t>(v)); }
  void put_bytes(std::span<const std::uint8_t> b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
  }

  std::size_t size() const noexcept { return buf_.size(); }
  const Bytes& bytes() const& noexcept { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  void put_le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes buf_;
};

// Bounds-checked reader. Running past the end throws Error(on_truncate) with
// the current absolute offset and the configured context name.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, Errc on_truncate,
             std::string context, std::size_t base_offset = 0)
      : data_(data),
        on_truncate_(on_truncate),
        context_(std::move(context)),
        base_(base_offset) {}

  std::uint8_t get_u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint16_t get_u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t get_u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t get_u64() { return get_le(8); }
  std::int32_t get_i32() { return static_cast<std::int32_t>(get_u32()); }

  std::span<const std::uint8_t> get_bytes(std::size_t n) {
    require(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  void require(std::size_t n) const {
    if (remaining() < n) {
      throw Error(on_truncate_,
                  context_ + ": truncated, need " + std::to_string(n) +
                      " bytes at offset " + std::to_string(offset()),
                  offset(), context_);
    }
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }
  std::size_t position() const noexcept { return pos_; }
  std::size_t offset() const noexcept { return base_ + pos_; }
  const std::string& context() const noexcept { return context_; }

 private:
  std::uint64_t get_le(int n) {
    require(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  Errc on_truncate_;
  std::string context_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace valori
