#include <benchmark/benchmark.h>

#include "stylespace/embedspace.hpp"
#include "stylespace/harness.hpp"
#include "stylespace/rng.hpp"
#include "stylespace/sensitivity.hpp"
#include "stylespace/umap.hpp"
#include "stylespace/validator.hpp"

using namespace stylespace;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal() + static_cast<double>(r % 4) * 3.0;
  }
  return m;
}

std::vector<std::string> texts(std::size_t n, std::size_t tokens) {
  StyleKnobs k;
  k.seed = 1;
  std::vector<std::string> out;
  for (auto& d : synthesize_corpus(k, n, tokens)) out.push_back(std::move(d.document.text));
  return out;
}

}  // namespace

// 384 documents in a 1024-d space, the typical corpus size.
static void BM_KMeans(benchmark::State& state) {
  const auto x = gaussian(static_cast<std::size_t>(state.range(0)), 1024, 7);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(x, 4, 0));
}
BENCHMARK(BM_KMeans)->Arg(96)->Arg(384)->Unit(benchmark::kMillisecond);

static void BM_Umap2d(benchmark::State& state) {
  const auto x = gaussian(static_cast<std::size_t>(state.range(0)), 256, 7);
  for (auto _ : state) benchmark::DoNotOptimize(umap_reduce(x, 2, 0));
}
BENCHMARK(BM_Umap2d)->Arg(96)->Arg(384)->Unit(benchmark::kMillisecond);

static void BM_CharNgramFit(benchmark::State& state) {
  const auto docs = texts(static_cast<std::size_t>(state.range(0)), 600);
  for (auto _ : state) {
    auto v = Vectorizer::fit(docs, VectorizerMode::kCharNgram);
    benchmark::DoNotOptimize(v.transform(docs));
  }
}
BENCHMARK(BM_CharNgramFit)->Arg(96)->Arg(384)->Unit(benchmark::kMillisecond);

// A CROSS comparison with 96 x 288 pairs.
static void BM_Pearson(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = 0.5 * x[i] + rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(pearson(x, y));
}
BENCHMARK(BM_Pearson)->Arg(288)->Arg(27648);
BENCHMARK_MAIN();
