#include <benchmark/benchmark.h>

#include <cstdint>

#include "spca/linalg.hpp"
#include "spca/matching.hpp"
#include "spca/rng.hpp"
#include "spca/solver.hpp"

namespace {

spca::PsdMatrix random_psd(std::size_t d, std::size_t rank,
                           std::uint64_t seed) {
  spca::Rng rng(seed);
  spca::Matrix b(d, rank);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < rank; ++j) b(i, j) = rng.normal();
  return spca::PsdMatrix::from_dense(
      spca::matmul(b, spca::transpose(b)));
}

void BM_Eigensolver(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const spca::PsdMatrix a = random_psd(d, d, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spca::sym_eig_truncated(a));
  }
}
// 64 is the crossover from Jacobi sweeps to tridiagonal QL.
BENCHMARK(BM_Eigensolver)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_Matching(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const std::size_t k = static_cast<std::size_t>(state.range(1));
  const std::size_t s = static_cast<std::size_t>(state.range(2));
  spca::Rng rng(2);
  spca::Matrix w(d, k);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < k; ++j) w(i, j) = rng.normal();
  const spca::WeightedBipartiteGraph g = spca::gen_bigraph(w, s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spca::max_weight_perfect_matching(g));
  }
}
BENCHMARK(BM_Matching)->Args({32, 4, 4})->Args({128, 5, 8})->Args({512, 5, 8});

void BM_CandidateScan(benchmark::State& state) {
  const std::size_t rank = static_cast<std::size_t>(state.range(0));
  const spca::PsdMatrix a = random_psd(24, rank, 3);
  const spca::EigFactor f = spca::sym_eig_truncated(a);
  spca::SolverConfig cfg;
  cfg.k = 2;
  cfg.s = 3;
  cfg.eps = 0.5;
  std::uint64_t candidates = 0;
  for (auto _ : state) {
    const spca::SolveReport rep = spca::solve_multi_spca(f, a, cfg);
    candidates += rep.net_points_examined;
    benchmark::DoNotOptimize(rep.objective);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(candidates));
}
BENCHMARK(BM_CandidateScan)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
