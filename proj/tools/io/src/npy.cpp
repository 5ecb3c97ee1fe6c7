#include "valori/io/npy.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <regex>
#include <string>

#include "valori/error.hpp"

namespace valori::io {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(Errc::kParseError, "npy: " + what);
}

std::size_t to_size(const std::string& s) {
  std::size_t v = 0;
  for (char c : s) {
    if (v > (SIZE_MAX - 9) / 10) bad("shape dimension too large");
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

}  // namespace

std::uint64_t NpyArray::bits(std::size_t r, std::size_t c) const {
  const std::size_t off = (r * cols + c) * element_size();
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < element_size(); ++i) {
    v |= static_cast<std::uint64_t>(data[off + i]) << (8 * i);
  }
  return v;
}

double NpyArray::value(std::size_t r, std::size_t c) const {
  const std::uint64_t b = bits(r, c);
  if (dtype == NpyDtype::kF32) {
    return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(b)));
  }
  return std::bit_cast<double>(b);
}

NpyArray parse_npy(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::kParseError, "npy");
  const auto magic = r.get_bytes(6);
  if (magic[0] != 0x93 || std::string(magic.begin() + 1, magic.end()) != "NUMPY") {
    bad("missing \\x93NUMPY magic");
  }
  const std::uint8_t major = r.get_u8();
  r.get_u8();
  std::size_t header_len = 0;
  if (major == 1) {
    header_len = r.get_u16();
  } else if (major == 2 || major == 3) {
    header_len = r.get_u32();
  } else {
    bad("unsupported format version " + std::to_string(major));
  }
  const auto hb = r.get_bytes(header_len);
  const std::string header(hb.begin(), hb.end());

  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([<>|=]?)([a-z])(\d+)')"))) {
    bad("header has no descr");
  }
  NpyArray out;
  const std::string order = m[1], kind = m[2], width = m[3];
  if (order == ">") bad("big-endian arrays are not supported");
  if (kind == "f" && width == "4") {
    out.dtype = NpyDtype::kF32;
  } else if (kind == "f" && width == "8") {
    out.dtype = NpyDtype::kF64;
  } else {
    bad("dtype " + kind + width + " is not float32 or float64");
  }
  if (!std::regex_search(header, m, std::regex(R"('fortran_order'\s*:\s*(True|False))"))) {
    bad("header has no fortran_order");
  }
  if (m[1] == "True") bad("Fortran-order arrays are not supported");
  if (!std::regex_search(header, m, std::regex(R"('shape'\s*:\s*\(([^)]*)\))"))) {
    bad("header has no shape");
  }
  std::vector<std::size_t> shape;
  const std::string dims = m[1];
  const std::regex num(R"(\d+)");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num);
       it != std::sregex_iterator(); ++it) {
    shape.push_back(to_size(it->str()));
  }
  if (shape.size() == 1) {
    out.rows = 1;
    out.cols = shape[0];
  } else if (shape.size() == 2) {
    out.rows = shape[0];
    out.cols = shape[1];
  } else {
    bad("expected a 1-D or 2-D array, got " + std::to_string(shape.size()) + " dimensions");
  }
  if (out.cols != 0 && out.rows > SIZE_MAX / out.cols / out.element_size()) {
    bad("shape too large");
  }
  const std::size_t n = out.rows * out.cols * out.element_size();
  if (r.remaining() != n) {
    bad("data section holds " + std::to_string(r.remaining()) + " bytes, shape needs " +
        std::to_string(n));
  }
  const auto body = r.get_bytes(n);
  out.data.assign(body.begin(), body.end());
  return out;
}

NpyArray load_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_npy(bytes);
}

}  // namespace valori::io
