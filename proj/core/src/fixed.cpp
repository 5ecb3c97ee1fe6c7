#include "valori/fixed.hpp"

#include <cmath>
#include <string>

#include "valori/error.hpp"

namespace valori {

namespace {

std::string decimal(std::int64_t raw, unsigned frac_bits) {
  const bool negative = raw < 0;
  const std::uint64_t mag = negative ? 0 - static_cast<std::uint64_t>(raw)
                                     : static_cast<std::uint64_t>(raw);
  const std::uint64_t mask = (std::uint64_t{1} << frac_bits) - 1;
  std::string out = negative ? "-" : "";
  out += std::to_string(mag >> frac_bits);
  std::uint64_t frac = mag & mask;
  if (frac != 0) out += '.';
  // frac < 2^32, so frac * 10 cannot overflow
  while (frac != 0) {
    frac *= 10;
    out += static_cast<char>('0' + (frac >> frac_bits));
    frac &= mask;
  }
  return out;
}

}  // namespace

std::string to_decimal(Fixed32 a) { return decimal(a.raw, Fixed32::kFracBits); }
std::string to_decimal(Wide64 a) { return decimal(a.raw, 32); }


Fixed32 from_float(double x) {
  if (!std::isfinite(x)) {
    throw Error(Errc::kNonFiniteInput, "coordinate is NaN or infinite");
  }
  // Scaling by a power of two is exact in binary64 for every finite input
  // that can reach the saturation bounds, and std::round is exact.
  const double scaled = std::round(std::ldexp(x, Fixed32::kFracBits));
  if (scaled >= 2147483647.0) return Fixed32::from_raw(INT32_MAX);
  if (scaled <= -2147483648.0) return Fixed32::from_raw(INT32_MIN);
  return Fixed32::from_raw(static_cast<std::int32_t>(scaled));
}

Fixed32 from_float(float x) { return from_float(static_cast<double>(x)); }

FixedVector::FixedVector(std::vector<Fixed32> coords)
    : coords_(std::move(coords)) {
  if (coords_.size() > kMaxDim) {
    throw Error(Errc::kInvalidArgument,
                "vector dimension exceeds " + std::to_string(kMaxDim));
  }
}

FixedVector::FixedVector(std::initializer_list<Fixed32> coords)
    : FixedVector(std::vector<Fixed32>(coords)) {}

FixedVector FixedVector::from_raw(std::span<const std::int32_t> raw) {
  std::vector<Fixed32> coords;
  coords.reserve(raw.size());
  for (std::int32_t r : raw) coords.push_back(Fixed32::from_raw(r));
  return FixedVector(std::move(coords));
}

FixedVector FixedVector::from_floats(std::span<const float> xs) {
  std::vector<Fixed32> coords;
  coords.reserve(xs.size());
  for (float x : xs) coords.push_back(from_float(x));
  return FixedVector(std::move(coords));
}

FixedVector FixedVector::from_doubles(std::span<const double> xs) {
  std::vector<Fixed32> coords;
  coords.reserve(xs.size());
  for (double x : xs) coords.push_back(from_float(x));
  return FixedVector(std::move(coords));
}

std::vector<std::int32_t> FixedVector::raw() const {
  std::vector<std::int32_t> out;
  out.reserve(coords_.size());
  for (Fixed32 c : coords_) out.push_back(c.raw);
  return out;
}

namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::kDimensionMismatch,
                std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a > kMaxDim) {
    throw Error(Errc::kInvalidArgument, "dimension exceeds supported bound");
  }
}

}  // namespace

// Plain loops over the raw integers; the compiler is free to vectorize them
// because exact integer addition gives the same sum in any grouping. On x86-64
// an AVX2 clone is selected at load time where the CPU supports it.
#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__) && \
    !defined(VALORI_NO_TARGET_CLONES)
#define VALORI_KERNEL_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define VALORI_KERNEL_CLONES
#endif

namespace {

// Accumulates in uint64 so inputs outside the supported range wrap with
// defined two's-complement behaviour instead of invoking UB.
VALORI_KERNEL_CLONES
std::int64_t dot_raw(const Fixed32* a, const Fixed32* b, std::size_t n) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<std::uint64_t>(std::int64_t{a[i].raw} * b[i].raw);
  }
  return static_cast<std::int64_t>(acc);
}

// |a - b| < 2^32 always fits in uint32, and its square fits in uint64.
VALORI_KERNEL_CLONES
std::int64_t l2_sq_raw(const Fixed32* a, const Fixed32* b, std::size_t n) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t diff =
        static_cast<std::uint32_t>(a[i].raw) - static_cast<std::uint32_t>(b[i].raw);
    const std::uint32_t mag = a[i].raw >= b[i].raw ? diff : 0u - diff;
    acc += std::uint64_t{mag} * mag;
  }
  return static_cast<std::int64_t>(acc);
}

}  // namespace

Wide64 dot_wide(std::span<const Fixed32> a, std::span<const Fixed32> b) {
  check_dims(a.size(), b.size());
  return {dot_raw(a.data(), b.data(), a.size())};
}

Wide64 dot_wide(const FixedVector& a, const FixedVector& b) {
  return dot_wide(a.coords(), b.coords());
}

Wide64 l2_sq_wide(std::span<const Fixed32> a, std::span<const Fixed32> b) {
  check_dims(a.size(), b.size());
  return {l2_sq_raw(a.data(), b.data(), a.size())};
}

Wide64 l2_sq_wide(const FixedVector& a, const FixedVector& b) {
  return l2_sq_wide(a.coords(), b.coords());
}

}  // namespace valori
