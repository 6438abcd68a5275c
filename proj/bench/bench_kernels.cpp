#include <benchmark/benchmark.h>

#include <random>

#include "stca/model/params.hpp"
#include "stca/numerics/kernels.hpp"
#include "stca/ragged/ragged.hpp"

namespace {

using stca::numerics::Exec;
using stca::numerics::Matrix;
using stca::numerics::Trans;

Matrix<float> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  Matrix<float> m(rows, cols);
  for (auto& v : m.values()) v = dist(rng);
  return m;
}

void BM_GemmSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  Matrix<float> c(n, n);
  for (auto _ : state) {
    stca::numerics::serial::gemm<float>(a, Trans::kNo, b, Trans::kNo, c, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

void BM_GemmParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  Matrix<float> c(n, n);
  for (auto _ : state) {
    stca::numerics::gemm<float>(a, Trans::kNo, b, Trans::kNo, c, false, Exec::kParallel);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

void ragged_attention(benchmark::State& state, Exec exec) {
  const std::size_t batch = 32, d = 64, heads = 4;
  const auto max_len = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::vector<Matrix<float>> seqs;
  for (std::size_t b = 0; b < batch; ++b) seqs.push_back(random_matrix(len(rng), d, 100 + b));
  const auto ragged = stca::ragged::build_ragged<float>(seqs);
  const auto queries = random_matrix(batch, d, 3);
  const auto params = stca::model::AttentionParams<float>::random(d, heads, 11);
  for (auto _ : state) {
    auto out = stca::ragged::ragged_target_attention(queries, ragged, params, exec);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(ragged.total_tokens()));
}

void BM_RaggedAttentionSerial(benchmark::State& state) { ragged_attention(state, Exec::kSerial); }
void BM_RaggedAttentionParallel(benchmark::State& state) { ragged_attention(state, Exec::kParallel); }

}  // namespace

BENCHMARK(BM_GemmSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_GemmParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_RaggedAttentionSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_RaggedAttentionParallel)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
