#pragma once

// Derandomized HNSW over Q16.16 vectors.
//
// Every decision that is random in textbook HNSW is a pure function here:
//   * a node's level is derived from its id (level_for),
//   * the entry point is the first inserted live node and is kept on every
//     layer up to max_level,
//   * candidates are ordered by (Wide64 distance, id), a strict total order,
//   * neighbour lists are stored sorted by id.
// The same insert/remove sequence therefore yields the same topology on every
// host. Distances are exact integers; nothing on this path uses floating
// point.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "valori/fixed.hpp"

namespace valori {

using VectorId = std::uint64_t;
using VectorStore = std::map<VectorId, FixedVector>;

namespace hnsw {

struct Params {
  std::uint32_t m = 16;
  std::uint32_t ef_construction = 128;
  std::uint32_t ef_search = 64;

  friend bool operator==(const Params&, const Params&) = default;
};

struct Candidate {
  Wide64 dist;
  VectorId id = 0;

  friend constexpr auto operator<=>(const Candidate&, const Candidate&) = default;
};

// Ranked by Candidate order, best first.
using SearchResult = std::vector<Candidate>;

inline constexpr unsigned kMaxLevel = 16;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// min(trailing zeros of splitmix64(id), kMaxLevel): geometric with p = 1/2.
unsigned level_for(VectorId id) noexcept;

// First `m` ids of a candidate list that is already in Candidate order,
// returned sorted by id.
std::vector<VectorId> select_neighbors(std::span<const Candidate> sorted,
                                       std::size_t m);

struct Node {
  // layers[l] is the neighbour list on layer l, ascending by id.
  std::vector<std::vector<VectorId>> layers;

  unsigned top_layer() const noexcept {
    return static_cast<unsigned>(layers.size()) - 1;
  }
  friend bool operator==(const Node&, const Node&) = default;
};

class Graph {
 public:
  Graph() = default;
  explicit Graph(Params params) : params_(params) {}

  // Trusted constructor used by the snapshot decoder; call validate() after.
  static Graph from_parts(Params params, std::optional<VectorId> entry,
                          unsigned max_level, std::map<VectorId, Node> nodes);

  // `store` must already hold the vector for `id`.
  // Throws Error(kDuplicateNode).
  void insert(VectorId id, const VectorStore& store);

  // Removes `id` from every layer and repairs the neighbourhoods it leaves
  // behind. `store` must hold the vectors of all remaining nodes.
  // Throws Error(kUnknownNode).
  void remove(VectorId id, const VectorStore& store);

  // Top-k by Candidate order. Requires ef >= k; ef is raised to k otherwise.
  SearchResult search(std::span<const Fixed32> query, std::size_t k,
                      std::size_t ef, const VectorStore& store) const;

  // Checks every structural invariant; throws Error(kIntegrityViolation).
  void validate(const VectorStore& store) const;

  std::size_t layer_cap(unsigned layer) const noexcept {
    return layer == 0 ? 2 * std::size_t{params_.m} : params_.m;
  }

  const Params& params() const noexcept { return params_; }
  std::optional<VectorId> entry_point() const noexcept { return entry_; }
  unsigned max_level() const noexcept { return max_level_; }
  const std::map<VectorId, Node>& nodes() const noexcept { return nodes_; }
  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t size() const noexcept { return nodes_.size(); }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  Wide64 distance(std::span<const Fixed32> q, VectorId id,
                  const VectorStore& store) const;

  SearchResult search_layer(std::span<const Fixed32> q,
                            const SearchResult& entries, std::size_t ef,
                            unsigned layer, const VectorStore& store) const;

  Candidate descend(std::span<const Fixed32> q, unsigned from_layer,
                    unsigned to_layer, const VectorStore& store) const;

  void add_edge(VectorId from, VectorId to, unsigned layer);
  void erase_edge(VectorId from, VectorId to, unsigned layer);
  void link(VectorId a, VectorId b, unsigned layer, const VectorStore& store);
  void trim(VectorId id, unsigned layer, const VectorStore& store);
  void connect_layers(VectorId id, unsigned top, unsigned bottom,
                      Candidate start, const VectorStore& store);
  void repair_after_removal(VectorId removed, const Node& node,
                            const VectorStore& store);

  Params params_;
  std::optional<VectorId> entry_;
  unsigned max_level_ = 0;
  std::map<VectorId, Node> nodes_;
};

}  // namespace hnsw
}  // namespace valori
