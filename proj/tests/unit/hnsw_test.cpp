#include "valori/hnsw.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "test_support.hpp"
#include "valori/error.hpp"
#include "valori/oracle.hpp"
#include "valori/snapshot.hpp"

namespace valori::hnsw {
namespace {

using testing::Rng;

struct Fixture {
  Params params;
  VectorStore store;
  Graph graph{params};

  void add(VectorId id, FixedVector v) {
    store.emplace(id, std::move(v));
    graph.insert(id, store);
  }
  void drop(VectorId id) {
    graph.remove(id, store);
    store.erase(id);
  }
};

FixedVector scalar(double x) { return FixedVector{from_float(x)}; }

void expect_caps(const Graph& g) {
  for (const auto& [id, node] : g.nodes()) {
    for (unsigned l = 0; l < node.layers.size(); ++l) {
      ASSERT_LE(node.layers[l].size(), g.layer_cap(l)) << "node " << id << " layer " << l;
    }
  }
}

TEST(Splitmix64, ReferenceOutputs) {
  // First outputs of the reference generator seeded with 0 (state advances
  // by the golden gamma before mixing).
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(0x9e3779b97f4a7c15ULL), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(splitmix64(2 * 0x9e3779b97f4a7c15ULL), 0x06c45d188009454fULL);
}

TEST(LevelFor, PureAndCapped) {
  for (VectorId id = 0; id < 1000; ++id) {
    EXPECT_EQ(level_for(id), level_for(id));
    EXPECT_LE(level_for(id), kMaxLevel);
  }
  EXPECT_EQ(level_for(0), 0u);  // splitmix64(0) is odd
}

TEST(LevelFor, GeometricDistribution) {
  std::array<std::size_t, kMaxLevel + 1> at_least{};
  const std::size_t n = (1u << 16) + 1;
  for (VectorId id = 0; id < n; ++id) {
    for (unsigned l = 0; l <= level_for(id); ++l) ++at_least[l];
  }
  EXPECT_EQ(at_least[0], n);
  EXPECT_NEAR(static_cast<double>(at_least[1]) / n, 0.5, 0.01);
  EXPECT_NEAR(static_cast<double>(at_least[2]) / n, 0.25, 0.01);
  EXPECT_NEAR(static_cast<double>(at_least[3]) / n, 0.125, 0.01);
}

TEST(SelectNeighbors, FewerThanM) {
  std::vector<Candidate> c = {{{5}, 9}, {{7}, 2}};
  EXPECT_EQ(select_neighbors(c, 16), (std::vector<VectorId>{2, 9}));
}

TEST(SelectNeighbors, TieGoesToLowerId) {
  std::vector<Candidate> c = {{{1}, 4}, {{3}, 8}, {{3}, 12}};
  std::sort(c.begin(), c.end());
  EXPECT_EQ(select_neighbors(c, 2), (std::vector<VectorId>{4, 8}));
}

TEST(SelectNeighbors, MatchesSortThenTruncate) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Candidate> c;
    const auto n = rng.below(60);
    for (std::uint64_t i = 0; i < n; ++i) {
      c.push_back({{static_cast<std::int64_t>(rng.below(20))}, rng.below(1000) * 64 + i});
    }
    std::sort(c.begin(), c.end());
    const std::size_t m = 1 + rng.below(20);
    std::vector<VectorId> expect;
    for (std::size_t i = 0; i < std::min(m, c.size()); ++i) expect.push_back(c[i].id);
    std::sort(expect.begin(), expect.end());
    ASSERT_EQ(select_neighbors(c, m), expect);
  }
}

TEST(Graph, FirstInsertSetsEntry) {
  Fixture f;
  f.add(42, scalar(1.0));
  ASSERT_EQ(f.graph.entry_point(), 42u);
  EXPECT_EQ(f.graph.max_level(), level_for(42));
  EXPECT_EQ(f.graph.nodes().at(42).layers.size(), level_for(42) + 1);
  f.graph.validate(f.store);
}

TEST(Graph, TwoNodesAreMutualNeighbours) {
  Fixture f;
  f.add(1, scalar(0.0));
  f.add(2, scalar(1.0));
  const auto& n1 = f.graph.nodes().at(1);
  const auto& n2 = f.graph.nodes().at(2);
  const std::size_t shared = std::min(n1.layers.size(), n2.layers.size());
  for (std::size_t l = 0; l < shared; ++l) {
    EXPECT_EQ(n1.layers[l], std::vector<VectorId>{2});
    EXPECT_EQ(n2.layers[l], std::vector<VectorId>{1});
  }
  f.graph.validate(f.store);
}

TEST(Graph, DuplicateNodeRejected) {
  Fixture f;
  f.add(1, scalar(0.0));
  try {
    f.graph.insert(1, f.store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDuplicateNode);
  }
}

TEST(Graph, UnknownNodeRejected) {
  Fixture f;
  try {
    f.graph.remove(3, f.store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownNode);
  }
}

TEST(Graph, RemoveSoleNode) {
  Fixture f;
  f.add(7, scalar(0.5));
  f.drop(7);
  EXPECT_TRUE(f.graph.empty());
  EXPECT_FALSE(f.graph.entry_point().has_value());
  EXPECT_EQ(f.graph.max_level(), 0u);
  EXPECT_EQ(f.graph, Graph(f.params));
}

TEST(Graph, RemovedNodeLeavesNoEdges) {
  Fixture f;
  f.add(1, scalar(0.0));
  f.add(2, scalar(0.5));
  f.add(3, scalar(1.0));
  f.drop(2);
  for (const auto& [id, node] : f.graph.nodes()) {
    for (const auto& list : node.layers) {
      EXPECT_EQ(std::count(list.begin(), list.end(), 2u), 0);
    }
  }
  f.graph.validate(f.store);
}

TEST(Graph, EntryPointReassignedToSmallestLiveId) {
  Fixture f;
  Rng rng(12);
  for (VectorId id : {50, 10, 30, 20, 40}) f.add(id, testing::random_fixed(rng, 4));
  EXPECT_EQ(f.graph.entry_point(), 50u);
  f.drop(50);
  EXPECT_EQ(f.graph.entry_point(), 10u);
  f.graph.validate(f.store);
  f.drop(10);
  EXPECT_EQ(f.graph.entry_point(), 20u);
  f.graph.validate(f.store);
}

TEST(Graph, SameSequenceSameTopology) {
  auto build = [] {
    Fixture f;
    Rng rng(100);
    for (VectorId id = 0; id < 100; ++id) f.add(id * 3 + 1, testing::random_fixed(rng, 12));
    return f.graph;
  };
  const Graph a = build();
  const Graph b = build();
  EXPECT_EQ(a, b);
}

TEST(Graph, InvariantsHoldUnderRandomInsertDelete) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Fixture f;
    f.params.m = 4;  // small caps exercise trimming and repair heavily
    f.graph = Graph(f.params);
    Rng rng(seed);
    std::vector<VectorId> live;
    for (int step = 0; step < 400; ++step) {
      if (live.size() > 3 && rng.below(3) == 0) {
        const auto pos = rng.below(live.size());
        f.drop(live[pos]);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(pos));
      } else {
        const VectorId id = 1000 * seed + static_cast<VectorId>(step);
        f.add(id, testing::random_fixed(rng, 6));
        live.push_back(id);
      }
      ASSERT_NO_THROW(f.graph.validate(f.store)) << "seed " << seed << " step " << step;
      expect_caps(f.graph);
    }
  }
}

TEST(Search, EmptyGraph) {
  Fixture f;
  const auto q = scalar(0.0);
  EXPECT_TRUE(f.graph.search(q.coords(), 5, 10, f.store).empty());
}

TEST(Search, SingleNode) {
  Fixture f;
  f.add(9, scalar(2.0));
  const auto q = scalar(0.0);
  const auto r = f.graph.search(q.coords(), 1, 1, f.store);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 9u);
  EXPECT_EQ(r[0].dist, l2_sq_wide(q, f.store.at(9)));
}

TEST(Search, RepeatedQueriesIdentical) {
  Fixture f;
  Rng rng(31);
  for (VectorId id = 0; id < 200; ++id) f.add(id, testing::random_fixed(rng, 8));
  const auto q = testing::random_fixed(rng, 8);
  const auto first = f.graph.search(q.coords(), 10, 32, f.store);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(f.graph.search(q.coords(), 10, 32, f.store), first);
}

TEST(Search, ExhaustiveEfMatchesOracle) {
  Rng rng(64);
  for (int trial = 0; trial < 50; ++trial) {
    Fixture f;
    const auto n = 1 + rng.below(64);
    for (VectorId i = 0; i < n; ++i) f.add(rng.below(1u << 20) * 64 + i, testing::random_fixed(rng, 5, 4096));
    const auto q = testing::random_fixed(rng, 5, 4096);
    const std::size_t k = 1 + rng.below(n);
    ASSERT_EQ(f.graph.search(q.coords(), k, n, f.store),
              oracle::exact_knn_fixed(f.store, q, k));
  }
}

TEST(Search, TiesBrokenById) {
  Fixture f;
  for (VectorId id : {5, 3, 9, 1}) f.add(id, scalar(1.0));
  const auto q = scalar(0.0);
  const auto r = f.graph.search(q.coords(), 4, 4, f.store);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].id, 1u);
  EXPECT_EQ(r[1].id, 3u);
  EXPECT_EQ(r[2].id, 5u);
  EXPECT_EQ(r[3].id, 9u);
}

// The index must rank with integer distances only. Scan its translation unit
// for floating-point types.
TEST(CodeAudit, IndexHasNoFloatingPoint) {
  for (const char* path : {VALORI_SOURCE_DIR "/core/src/hnsw.cpp",
                           VALORI_SOURCE_DIR "/core/include/valori/hnsw.hpp"}) {
    std::ifstream in(path);
    ASSERT_TRUE(in) << path;
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    // ignore comments
    text = std::regex_replace(text, std::regex("//[^\n]*"), "");
    EXPECT_FALSE(std::regex_search(text, std::regex(R"(\b(float|double|long double)\b)")))
        << path;
    EXPECT_FALSE(std::regex_search(text, std::regex(R"(to_double)"))) << path;
  }
}

}  // namespace
}  // namespace valori::hnsw
