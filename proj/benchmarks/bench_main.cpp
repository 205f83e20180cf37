#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <vector>

#include "hubscan/attackbench.hpp"
#include "hubscan/index.hpp"
#include "hubscan/sampling.hpp"
#include "hubscan/scan.hpp"
#include "hubscan/stats.hpp"

using namespace hubscan;

namespace {

const Corpus& corpus_of(std::size_t n) {
  static std::map<std::size_t, Corpus> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    SyntheticCorpusSpec s;
    s.n_docs = n;
    s.seed = 3;
    it = cache.emplace(n, generate_synthetic_corpus(s)).first;
  }
  return it->second;
}

QuerySet random_queries(const Corpus& c, std::size_t n) {
  SamplingConfig cfg;
  cfg.total = n;
  cfg.frac_centroid = 0.0;
  cfg.frac_random = 1.0;
  cfg.seed = 11;
  return sample_queries(c, nullptr, cfg);
}

void BM_KnnBatch(benchmark::State& state) {
  const Corpus& c = corpus_of(std::size_t(state.range(0)));
  const FlatIndex index(c);
  const QuerySet q = random_queries(c, 256);
  for (auto _ : state) benchmark::DoNotOptimize(index.knn_batch(q.embeddings, 20));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_KnnBatch)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_ExecuteScan(benchmark::State& state) {
  const Corpus& c = corpus_of(5000);
  const FlatIndex index(c);
  const QuerySet q = random_queries(c, 2048);
  const ScanOptions opts{std::size_t(state.range(0)), 256};
  for (auto _ : state) benchmark::DoNotOptimize(execute_scan(index, c, q, 20, HitWeighting{}, {}, opts));
  state.SetItemsProcessed(state.iterations() * 2048);
}
BENCHMARK(BM_ExecuteScan)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_RobustZ(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> d(1.0);
  std::vector<double> x(std::size_t(state.range(0)));
  for (auto& v : x) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(robust_zscore(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RobustZ)->Arg(5000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
