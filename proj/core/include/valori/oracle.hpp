#pragma once

// Verification oracles. Nothing in here is used by the kernel; these are the
// independent references the kernel is checked against.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "valori/fixed.hpp"
#include "valori/hnsw.hpp"

namespace valori::oracle {

using BigInt = boost::multiprecision::cpp_int;

// Full scan with l2_sq_wide, ranked by (distance, id), top k.
hnsw::SearchResult exact_knn_fixed(const VectorStore& vectors,
                                   const FixedVector& q, std::size_t k);

struct FloatRow {
  VectorId id = 0;
  std::vector<float> coords;
};

// Full scan over the original float values with double-precision squared L2,
// ties broken by id. This is the float baseline for recall.
std::vector<VectorId> exact_knn_float(std::span<const FloatRow> rows,
                                      std::span<const float> q, std::size_t k);

// |a ∩ b| / k.
double recall_at_k(std::span<const VectorId> a, std::span<const VectorId> b,
                   std::size_t k);

struct RecallReport {
  std::vector<double> per_query_overlap;
  double mean_recall_at_k = 0.0;
  std::size_t k = 0;
  std::size_t query_count = 0;

  std::string to_table() const;
  // "query,overlap" rows followed by a "mean,<value>" row.
  std::string to_csv() const;
};

RecallReport make_recall_report(std::vector<double> per_query_overlap,
                                std::size_t k);

// Arbitrary-precision references over raw Q16.16 integers.
BigInt bigint_dot_check(std::span<const std::int32_t> a,
                        std::span<const std::int32_t> b);
BigInt bigint_l2_check(std::span<const std::int32_t> a,
                       std::span<const std::int32_t> b);

}  // namespace valori::oracle
