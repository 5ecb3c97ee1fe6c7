#pragma once

// Q16.16 fixed-point scalars and vectors.
//
// A Fixed32 stores value * 2^16 in a signed 32-bit integer. Narrow operations
// saturate at the raw bounds. Reductions over vectors accumulate exact 64-bit
// products (interpreted as Q32.32) and never narrow, so ranking by distance is
// an integer comparison and bit-identical on every host.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace valori {

struct Fixed32 {
  std::int32_t raw = 0;

  static constexpr int kFracBits = 16;
  static constexpr std::int32_t kOne = 1 << kFracBits;

  static constexpr Fixed32 from_raw(std::int32_t r) noexcept { return {r}; }

  friend constexpr auto operator<=>(Fixed32, Fixed32) = default;
};

// Q32.32 accumulator. Ordering is plain integer ordering.
struct Wide64 {
  std::int64_t raw = 0;

  friend constexpr auto operator<=>(Wide64, Wide64) = default;
};

// Largest supported vector dimension. With coordinates in [-1, 1] a full
// reduction at this width stays below 2^49 and cannot overflow Wide64.
inline constexpr std::size_t kMaxDim = 65536;

// Boundary conversion. Rounds x * 2^16 half away from zero and saturates to
// the raw range. Throws Error(kNonFiniteInput) on NaN or +-Inf. The float
// overload widens exactly to double first, so both overloads agree.
Fixed32 from_float(double x);
Fixed32 from_float(float x);

// Exact: |raw| < 2^31 fits the double mantissa. Diagnostic use only.
constexpr double to_double(Fixed32 a) noexcept {
  return static_cast<double>(a.raw) / 65536.0;
}

constexpr double to_double(Wide64 a) noexcept {
  return static_cast<double>(a.raw) / 4294967296.0;
}

// Exact decimal rendering computed with integers only, shortest form with
// no trailing zeros ("-1.5", "0.0000152587890625", "3").
std::string to_decimal(Fixed32 a);
std::string to_decimal(Wide64 a);

constexpr std::int32_t saturate32(std::int64_t v) noexcept {
  if (v > INT32_MAX) return INT32_MAX;
  if (v < INT32_MIN) return INT32_MIN;
  return static_cast<std::int32_t>(v);
}

constexpr Fixed32 add_sat(Fixed32 a, Fixed32 b) noexcept {
  return {saturate32(std::int64_t{a.raw} + b.raw)};
}

constexpr Fixed32 sub_sat(Fixed32 a, Fixed32 b) noexcept {
  return {saturate32(std::int64_t{a.raw} - b.raw)};
}

// Floor rounding: the 64-bit product is arithmetic-shifted right by 16.
constexpr Fixed32 mul_sat(Fixed32 a, Fixed32 b) noexcept {
  return {saturate32((std::int64_t{a.raw} * b.raw) >> Fixed32::kFracBits)};
}

class FixedVector {
 public:
  FixedVector() = default;
  explicit FixedVector(std::vector<Fixed32> coords);
  FixedVector(std::initializer_list<Fixed32> coords);

  static FixedVector from_raw(std::span<const std::int32_t> raw);
  static FixedVector from_raw(std::initializer_list<std::int32_t> raw) {
    return from_raw(std::span<const std::int32_t>(raw.begin(), raw.size()));
  }
  static FixedVector from_floats(std::span<const float> xs);
  static FixedVector from_doubles(std::span<const double> xs);

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const Fixed32> coords() const noexcept { return coords_; }
  const Fixed32& operator[](std::size_t i) const { return coords_[i]; }

  std::vector<std::int32_t> raw() const;

  friend bool operator==(const FixedVector&, const FixedVector&) = default;

 private:
  std::vector<Fixed32> coords_;
};

// Sum of a[i].raw * b[i].raw. Throws Error(kDimensionMismatch).
Wide64 dot_wide(std::span<const Fixed32> a, std::span<const Fixed32> b);
Wide64 dot_wide(const FixedVector& a, const FixedVector& b);

// Sum of (a[i].raw - b[i].raw)^2 with the difference taken in 64 bits.
Wide64 l2_sq_wide(std::span<const Fixed32> a, std::span<const Fixed32> b);
Wide64 l2_sq_wide(const FixedVector& a, const FixedVector& b);

}  // namespace valori
