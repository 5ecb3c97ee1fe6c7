#include <benchmark/benchmark.h>

#include <map>

#include "test_support.hpp"
#include "valori/replay_log.hpp"
#include "valori/snapshot.hpp"

namespace {

using namespace valori;
using testing::Rng;

void BM_DotWide(benchmark::State& st) {
  Rng rng(1);
  const auto dim = static_cast<std::size_t>(st.range(0));
  const auto a = testing::random_fixed(rng, dim);
  const auto b = testing::random_fixed(rng, dim);
  for (auto _ : st) benchmark::DoNotOptimize(dot_wide(a, b));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_DotWide)->Arg(64)->Arg(384)->Arg(1024);

void BM_L2SqWide(benchmark::State& st) {
  Rng rng(2);
  const auto dim = static_cast<std::size_t>(st.range(0));
  const auto a = testing::random_fixed(rng, dim);
  const auto b = testing::random_fixed(rng, dim);
  for (auto _ : st) benchmark::DoNotOptimize(l2_sq_wide(a, b));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_L2SqWide)->Arg(64)->Arg(384)->Arg(1024);

// Gaussian unit vectors, dim 384, default parameters. Built once per size.
const KernelState& corpus(std::size_t n) {
  static std::map<std::size_t, KernelState> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    Rng rng(3);
    KernelState s{KernelConfig{}};
    for (std::size_t i = 0; i < n; ++i) {
      s.apply(InsertCmd{i, FixedVector::from_floats(testing::gaussian_unit(rng, 384)), {}});
    }
    it = cache.emplace(n, std::move(s)).first;
  }
  return it->second;
}

void BM_Query(benchmark::State& st) {
  const KernelState& s = corpus(static_cast<std::size_t>(st.range(0)));
  Rng rng(4);
  std::vector<FixedVector> queries;
  for (int i = 0; i < 256; ++i) {
    queries.push_back(FixedVector::from_floats(testing::gaussian_unit(rng, 384)));
  }
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(query(s, queries[i++ % queries.size()], 10));
}
BENCHMARK(BM_Query)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

// One insert into a copy of an n-vector state; the copy is not timed.
void BM_Insert(benchmark::State& st) {
  const KernelState& base = corpus(static_cast<std::size_t>(st.range(0)));
  Rng rng(5);
  const auto v = FixedVector::from_floats(testing::gaussian_unit(rng, 384));
  VectorId id = 1'000'000;
  for (auto _ : st) {
    st.PauseTiming();
    KernelState s = base;
    st.ResumeTiming();
    s.apply(InsertCmd{id++, v, {}});
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Insert)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond)->Iterations(200);

void BM_SnapshotSerialize(benchmark::State& st) {
  const KernelState& s = corpus(static_cast<std::size_t>(st.range(0)));
  std::size_t bytes = 0;
  for (auto _ : st) {
    const Bytes b = snapshot::serialize(s);
    bytes = b.size();
    benchmark::DoNotOptimize(b.data());
  }
  st.SetBytesProcessed(st.iterations() * static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_SnapshotSerialize)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_StateHash(benchmark::State& st) {
  const KernelState& s = corpus(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(state_hash(s));
}
BENCHMARK(BM_StateHash)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SnapshotDeserialize(benchmark::State& st) {
  const Bytes b = snapshot::serialize(corpus(static_cast<std::size_t>(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(snapshot::deserialize(b));
  st.SetBytesProcessed(st.iterations() * static_cast<std::int64_t>(b.size()));
}
BENCHMARK(BM_SnapshotDeserialize)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LogParse(benchmark::State& st) {
  KernelConfig cfg;
  Rng rng(6);
  Bytes log = replay::encode_header(cfg);
  for (const auto& c : testing::random_log(rng, cfg, 1000)) {
    const Bytes r = replay::encode_record(c);
    log.insert(log.end(), r.begin(), r.end());
  }
  for (auto _ : st) benchmark::DoNotOptimize(replay::parse_log(log));
  st.SetBytesProcessed(st.iterations() * static_cast<std::int64_t>(log.size()));
}
BENCHMARK(BM_LogParse)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
