#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "pcr/encoder.hpp"
#include "pcr/index.hpp"
#include "pcr/objective.hpp"
#include "pcr/random.hpp"

namespace {

std::vector<double> random_vector(pcr::Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

void BM_Encode(benchmark::State& state) {
  pcr::EncoderConfig cfg;
  cfg.hash_buckets = 16384;
  cfg.embed_dim = static_cast<std::size_t>(state.range(0));
  cfg.hidden_dim = 64;
  cfg.out_dim = 64;
  const auto params = pcr::EncoderParams::initialize(cfg);
  std::string text;
  for (int i = 0; i < 200; ++i) text += "token" + std::to_string(i % 97) + " ";
  for (auto _ : state) benchmark::DoNotOptimize(pcr::encode(params, text));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Encode)->Arg(128)->Arg(512);

void BM_Search(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kDim = 64;
  pcr::Rng rng(1);
  std::vector<pcr::ArticleId> ids;
  std::vector<int> years;
  std::vector<float> matrix;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("a" + std::to_string(i));
    years.push_back(2000 + static_cast<int>(i % 20));
    for (std::size_t j = 0; j < kDim; ++j) matrix.push_back(static_cast<float>(rng.uniform(-1, 1)));
  }
  const pcr::VectorIndex index(ids, years, kDim, matrix);
  const auto query = random_vector(rng, kDim);
  for (auto _ : state) benchmark::DoNotOptimize(index.search(query, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Search)->Arg(1000)->Arg(20000);

void BM_QuadrupletGrad(benchmark::State& state) {
  pcr::Rng rng(2);
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto q = random_vector(rng, d), p1 = random_vector(rng, d), p2 = random_vector(rng, d),
             n = random_vector(rng, d);
  for (auto _ : state) benchmark::DoNotOptimize(pcr::quadruplet_grad(q, p1, p2, n));
}
BENCHMARK(BM_QuadrupletGrad)->Arg(64)->Arg(768);

}  // namespace

BENCHMARK_MAIN();
