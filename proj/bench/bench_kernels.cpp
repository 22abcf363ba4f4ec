// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "mwlab/kernels.hpp"
#include "mwlab/rng.hpp"

using namespace mwlab;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.normal();
  return m;
}

std::vector<TokenBag> random_bags(std::size_t n, std::uint32_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TokenBag> bags(n);
  for (auto& b : bags) {
    std::uint32_t bucket = 0;
    for (int t = 0; t < 16; ++t) {
      bucket += 1 + static_cast<std::uint32_t>(rng.below(dim / 32));
      if (bucket >= dim) break;
      b.entries.emplace_back(bucket, 1);
      ++b.total;
    }
  }
  return bags;
}

template <auto Fn>
void BM_similarity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 32, 1), b = random_matrix(4 * n, 32, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 4 * n));
}

template <auto Fn>
void BM_embedding_bag(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix emb = random_matrix(1 << 14, 64, 3);
  const auto bags = random_bags(n, 1 << 14, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(emb, bags));
}

template <auto Fn>
void BM_mw_pairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<double> pos(n), neg(n * (6 * n - 1));
  for (auto& v : pos) v = rng.normal();
  for (auto& v : neg) v = rng.normal();
  std::vector<double> dp(pos.size()), dn(neg.size());
  for (auto _ : state) benchmark::DoNotOptimize(Fn(pos, neg, 0.01, 1.0, dp, dn));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pos.size() * neg.size()));
}

template <auto Fn>
void BM_top_k(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix scores = random_matrix(n, 5000, 6);
  std::vector<std::string> keys;
  for (int j = 0; j < 5000; ++j) keys.push_back("d" + std::to_string(j));
  std::vector<std::vector<std::size_t>> excl(n, std::vector<std::size_t>{0});
  for (auto _ : state) benchmark::DoNotOptimize(Fn(scores, excl, 500, keys));
}

}  // namespace

BENCHMARK(BM_similarity<kernels::serial::similarity>)->Name("similarity/serial")->Arg(32)->Arg(128);
BENCHMARK(BM_similarity<kernels::parallel::similarity>)->Name("similarity/parallel")->Arg(32)->Arg(128);
BENCHMARK(BM_embedding_bag<kernels::serial::embedding_bag_mean>)->Name("embedding_bag/serial")->Arg(192)->Arg(2048);
BENCHMARK(BM_embedding_bag<kernels::parallel::embedding_bag_mean>)->Name("embedding_bag/parallel")->Arg(192)->Arg(2048);
BENCHMARK(BM_mw_pairwise<kernels::serial::mw_pairwise>)->Name("mw_pairwise/serial")->Arg(32)->Arg(64);
BENCHMARK(BM_mw_pairwise<kernels::parallel::mw_pairwise>)->Name("mw_pairwise/parallel")->Arg(32)->Arg(64);
BENCHMARK(BM_top_k<kernels::serial::top_k_rows>)->Name("top_k/serial")->Arg(64);
BENCHMARK(BM_top_k<kernels::parallel::top_k_rows>)->Name("top_k/parallel")->Arg(64);

BENCHMARK_MAIN();
