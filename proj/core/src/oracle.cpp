#include "valori/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

#include "valori/error.hpp"

namespace valori::oracle {

hnsw::SearchResult exact_knn_fixed(const VectorStore& vectors,
                                   const FixedVector& q, std::size_t k) {
  hnsw::SearchResult all;
  all.reserve(vectors.size());
  for (const auto& [id, v] : vectors) all.push_back({l2_sq_wide(q, v), id});
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end());
  all.resize(n);
  return all;
}

std::vector<VectorId> exact_knn_float(std::span<const FloatRow> rows,
                                      std::span<const float> q, std::size_t k) {
  std::vector<std::pair<double, VectorId>> scored;
  scored.reserve(rows.size());
  for (const FloatRow& row : rows) {
    if (row.coords.size() != q.size()) {
      throw Error(Errc::kDimensionMismatch, "row " + std::to_string(row.id));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double d = static_cast<double>(row.coords[i]) - static_cast<double>(q[i]);
      acc += d * d;
    }
    scored.emplace_back(acc, row.id);
  }
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n),
                    scored.end());
  std::vector<VectorId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(scored[i].second);
  return out;
}

double recall_at_k(std::span<const VectorId> a, std::span<const VectorId> b,
                   std::size_t k) {
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be >= 1");
  const std::set<VectorId> sa(a.begin(), a.end());
  std::size_t shared = 0;
  for (VectorId id : std::set<VectorId>(b.begin(), b.end())) shared += sa.count(id);
  return static_cast<double>(shared) / static_cast<double>(k);
}

RecallReport make_recall_report(std::vector<double> per_query_overlap,
                                std::size_t k) {
  RecallReport r;
  r.k = k;
  r.query_count = per_query_overlap.size();
  if (!per_query_overlap.empty()) {
    r.mean_recall_at_k =
        std::accumulate(per_query_overlap.begin(), per_query_overlap.end(), 0.0) /
        static_cast<double>(per_query_overlap.size());
  }
  r.per_query_overlap = std::move(per_query_overlap);
  return r;
}

std::string RecallReport::to_table() const {
  double lo = 1.0;
  std::size_t perfect = 0;
  for (double v : per_query_overlap) {
    lo = std::min(lo, v);
    if (v == 1.0) ++perfect;
  }
  if (per_query_overlap.empty()) lo = 0.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "metric            value\n"
                "k                 %zu\n"
                "queries           %zu\n"
                "mean Recall@%-4zu  %.4f\n"
                "min overlap       %.4f\n"
                "perfect queries   %zu\n",
                k, query_count, k, mean_recall_at_k, lo, perfect);
  return buf;
}

std::string RecallReport::to_csv() const {
  std::string out = "query,overlap\n";
  char buf[64];
  for (std::size_t i = 0; i < per_query_overlap.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i, per_query_overlap[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "mean,%.6f\n", mean_recall_at_k);
  out += buf;
  return out;
}

namespace {

void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw Error(Errc::kDimensionMismatch, "oracle operands differ in length");
}

}  // namespace

BigInt bigint_dot_check(std::span<const std::int32_t> a,
                        std::span<const std::int32_t> b) {
  check_same_dim(a.size(), b.size());
  BigInt acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += BigInt(a[i]) * BigInt(b[i]);
  return acc;
}

BigInt bigint_l2_check(std::span<const std::int32_t> a,
                       std::span<const std::int32_t> b) {
  check_same_dim(a.size(), b.size());
  BigInt acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const BigInt d = BigInt(a[i]) - BigInt(b[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace valori::oracle
