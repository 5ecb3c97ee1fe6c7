#include "valori/hnsw.hpp"

#include <algorithm>
#include <bit>
#include <array>
#include <functional>
#include <memory_resource>
#include <queue>
#include <string>
#include <unordered_set>
#include <utility>

#include "valori/error.hpp"

namespace valori::hnsw {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

unsigned level_for(VectorId id) noexcept {
  const auto tz = static_cast<unsigned>(std::countr_zero(splitmix64(id)));
  return std::min(tz, kMaxLevel);
}

std::vector<VectorId> select_neighbors(std::span<const Candidate> sorted,
                                       std::size_t m) {
  const std::size_t n = std::min(m, sorted.size());
  std::vector<VectorId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sorted[i].id);
  std::sort(out.begin(), out.end());
  return out;
}

Graph Graph::from_parts(Params params, std::optional<VectorId> entry,
                        unsigned max_level, std::map<VectorId, Node> nodes) {
  Graph g(params);
  g.entry_ = entry;
  g.max_level_ = max_level;
  g.nodes_ = std::move(nodes);
  return g;
}

Wide64 Graph::distance(std::span<const Fixed32> q, VectorId id,
                       const VectorStore& store) const {
  return l2_sq_wide(q, store.at(id).coords());
}

SearchResult Graph::search_layer(std::span<const Fixed32> q,
                                 const SearchResult& entries, std::size_t ef,
                                 unsigned layer,
                                 const VectorStore& store) const {
  // `frontier` pops the closest unexpanded candidate, `best` keeps the ef
  // closest seen so far with the worst on top. The visited set is only
  // probed, never iterated, so it cannot influence the result.
  std::array<std::byte, 1 << 16> scratch;
  std::pmr::monotonic_buffer_resource arena(scratch.data(), scratch.size());
  using Heap = std::pmr::vector<Candidate>;
  std::priority_queue<Candidate, Heap, std::greater<>> frontier(std::greater<>{},
                                                                Heap(&arena));
  std::priority_queue<Candidate, Heap> best(std::less<Candidate>{}, Heap(&arena));
  std::pmr::unordered_set<VectorId> visited(ef * 4, &arena);

  for (const Candidate& c : entries) {
    if (!visited.insert(c.id).second) continue;
    frontier.push(c);
    best.push(c);
    if (best.size() > ef) best.pop();
  }

  while (!frontier.empty()) {
    const Candidate current = frontier.top();
    if (best.size() >= ef && best.top() < current) break;
    frontier.pop();

    for (VectorId nb : nodes_.at(current.id).layers[layer]) {
      if (!visited.insert(nb).second) continue;
      const Candidate cand{distance(q, nb, store), nb};
      if (best.size() < ef || cand < best.top()) {
        frontier.push(cand);
        best.push(cand);
        if (best.size() > ef) best.pop();
      }
    }
  }

  SearchResult out(best.size());
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = best.top();
    best.pop();
  }
  return out;
}

Candidate Graph::descend(std::span<const Fixed32> q, unsigned from_layer,
                         unsigned to_layer, const VectorStore& store) const {
  Candidate current{distance(q, *entry_, store), *entry_};
  for (unsigned layer = from_layer; layer > to_layer; --layer) {
    current = search_layer(q, {current}, 1, layer, store).front();
  }
  return current;
}

void Graph::add_edge(VectorId from, VectorId to, unsigned layer) {
  auto& list = nodes_.at(from).layers[layer];
  auto pos = std::lower_bound(list.begin(), list.end(), to);
  if (pos == list.end() || *pos != to) list.insert(pos, to);
}

void Graph::erase_edge(VectorId from, VectorId to, unsigned layer) {
  auto& list = nodes_.at(from).layers[layer];
  auto pos = std::lower_bound(list.begin(), list.end(), to);
  if (pos != list.end() && *pos == to) list.erase(pos);
}

void Graph::link(VectorId a, VectorId b, unsigned layer,
                 const VectorStore& store) {
  add_edge(a, b, layer);
  add_edge(b, a, layer);
  trim(b, layer, store);
}

// Drops the worst neighbours (Candidate order, measured from `id`) until the
// list fits the layer cap, removing the reverse edges as well.
void Graph::trim(VectorId id, unsigned layer, const VectorStore& store) {
  auto& list = nodes_.at(id).layers[layer];
  const std::size_t cap = layer_cap(layer);
  if (list.size() <= cap) return;

  const auto q = store.at(id).coords();
  std::vector<Candidate> ranked;
  ranked.reserve(list.size());
  for (VectorId nb : list) ranked.push_back({distance(q, nb, store), nb});
  std::sort(ranked.begin(), ranked.end());

  list = select_neighbors(ranked, cap);
  for (std::size_t i = cap; i < ranked.size(); ++i) {
    erase_edge(ranked[i].id, id, layer);
  }
}

// Links `id` on layers top..bottom (descending), seeding the first layer's
// search with `start` and each lower layer with the previous layer's beam.
void Graph::connect_layers(VectorId id, unsigned top, unsigned bottom,
                           Candidate start, const VectorStore& store) {
  const auto q = store.at(id).coords();
  SearchResult entries{start};
  for (unsigned layer = top;; --layer) {
    SearchResult beam =
        search_layer(q, entries, params_.ef_construction, layer, store);
    std::erase_if(beam, [id](const Candidate& c) { return c.id == id; });
    for (VectorId nb : select_neighbors(beam, params_.m)) {
      link(id, nb, layer, store);
    }
    entries = std::move(beam);
    if (layer == bottom) break;
  }
}

void Graph::insert(VectorId id, const VectorStore& store) {
  if (nodes_.contains(id)) {
    throw Error(Errc::kDuplicateNode, "node " + std::to_string(id));
  }
  if (!store.contains(id)) {
    throw Error(Errc::kInvalidArgument,
                "no stored vector for node " + std::to_string(id));
  }
  const unsigned level = level_for(id);

  if (!entry_) {
    entry_ = id;
    max_level_ = level;
    nodes_[id].layers.resize(level + 1);
    return;
  }

  // The entry point lives on every layer up to max_level, so a taller node
  // raises it too.
  if (level > max_level_) {
    nodes_.at(*entry_).layers.resize(level + 1);
    max_level_ = level;
  }
  nodes_[id].layers.resize(level + 1);

  const auto q = store.at(id).coords();
  const Candidate start = descend(q, max_level_, level, store);
  connect_layers(id, level, 0, start, store);
}

void Graph::repair_after_removal(VectorId removed, const Node& node,
                                 const VectorStore& store) {
  for (unsigned layer = 0; layer < node.layers.size(); ++layer) {
    const auto& orphans = node.layers[layer];
    for (VectorId nb : orphans) erase_edge(nb, removed, layer);

    for (VectorId n : orphans) {
      const std::vector<VectorId> current = nodes_.at(n).layers[layer];
      std::vector<VectorId> pool;
      std::set_union(current.begin(), current.end(), orphans.begin(),
                     orphans.end(), std::back_inserter(pool));
      std::erase(pool, n);
      if (pool.size() == current.size()) continue;

      const auto q = store.at(n).coords();
      std::vector<Candidate> ranked;
      ranked.reserve(pool.size());
      for (VectorId p : pool) ranked.push_back({distance(q, p, store), p});
      std::sort(ranked.begin(), ranked.end());
      const std::vector<VectorId> chosen =
          select_neighbors(ranked, layer_cap(layer));

      nodes_.at(n).layers[layer] = chosen;
      for (VectorId w : current) {
        if (!std::binary_search(chosen.begin(), chosen.end(), w)) {
          erase_edge(w, n, layer);
        }
      }
      for (VectorId y : chosen) {
        if (!std::binary_search(current.begin(), current.end(), y)) {
          add_edge(y, n, layer);
          trim(y, layer, store);
        }
      }
    }
  }
}

void Graph::remove(VectorId id, const VectorStore& store) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw Error(Errc::kUnknownNode, "node " + std::to_string(id));
  }
  const Node removed = std::move(it->second);
  nodes_.erase(it);
  repair_after_removal(id, removed, store);

  if (nodes_.empty()) {
    entry_.reset();
    max_level_ = 0;
    return;
  }

  unsigned new_max = 0;
  for (const auto& [nid, node] : nodes_) new_max = std::max(new_max, level_for(nid));

  if (*entry_ == id) {
    // Smallest live id takes over and is promoted to the top layer.
    entry_ = nodes_.begin()->first;
    const VectorId entry = *entry_;
    const unsigned own = nodes_.at(entry).top_layer();
    if (new_max > own) {
      nodes_.at(entry).layers.resize(new_max + 1);
      VectorId seed = 0;
      for (const auto& [nid, node] : nodes_) {
        if (nid != entry && node.top_layer() >= new_max) {
          seed = nid;
          break;
        }
      }
      const auto q = store.at(entry).coords();
      connect_layers(entry, new_max, own + 1, {distance(q, seed, store), seed},
                     store);
    }
  } else {
    // Layers above the new maximum hold only the entry point, with no edges.
    nodes_.at(*entry_).layers.resize(new_max + 1);
  }
  max_level_ = new_max;
}

SearchResult Graph::search(std::span<const Fixed32> query, std::size_t k,
                           std::size_t ef, const VectorStore& store) const {
  if (nodes_.empty() || k == 0) return {};
  ef = std::max(ef, k);
  const Candidate start = descend(query, max_level_, 0, store);
  SearchResult out = search_layer(query, {start}, ef, 0, store);
  if (out.size() > k) out.resize(k);
  return out;
}

namespace {

[[noreturn]] void violation(const std::string& what) {
  throw Error(Errc::kIntegrityViolation, "graph: " + what);
}

}  // namespace

void Graph::validate(const VectorStore& store) const {
  if (nodes_.empty()) {
    if (entry_ || max_level_ != 0) violation("empty graph with entry point");
    if (!store.empty()) violation("live vectors missing from index");
    return;
  }
  if (!entry_ || !nodes_.contains(*entry_)) violation("entry point not in graph");
  if (store.size() != nodes_.size()) violation("index does not cover live vectors");

  unsigned expected_max = 0;
  for (const auto& [id, node] : nodes_) expected_max = std::max(expected_max, level_for(id));
  if (max_level_ != expected_max) violation("max_level does not match node levels");

  for (const auto& [id, node] : nodes_) {
    if (!store.contains(id)) violation("node " + std::to_string(id) + " has no vector");
    const unsigned expected_top = id == *entry_ ? max_level_ : level_for(id);
    if (node.layers.size() != expected_top + 1) {
      violation("node " + std::to_string(id) + " has wrong layer count");
    }
    for (unsigned layer = 0; layer < node.layers.size(); ++layer) {
      const auto& list = node.layers[layer];
      if (list.size() > layer_cap(layer)) {
        violation("node " + std::to_string(id) + " exceeds degree cap");
      }
      for (std::size_t i = 0; i < list.size(); ++i) {
        const VectorId nb = list[i];
        if (i > 0 && list[i - 1] >= nb) violation("neighbour list not strictly ascending");
        if (nb == id) violation("self edge on node " + std::to_string(id));
        auto other = nodes_.find(nb);
        if (other == nodes_.end() || other->second.layers.size() <= layer) {
          violation("edge to node absent from layer");
        }
        const auto& back = other->second.layers[layer];
        if (!std::binary_search(back.begin(), back.end(), id)) {
          violation("asymmetric edge " + std::to_string(id) + "-" + std::to_string(nb));
        }
      }
    }
  }
}

}  // namespace valori::hnsw
