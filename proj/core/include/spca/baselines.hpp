#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "spca/components.hpp"
#include "spca/linalg.hpp"

namespace spca {

struct OracleResult {
  double opt_value = 0.0;
  SupportSet opt_supports;
  std::uint64_t instances_enumerated = 0;
};

// Exhaustive optimum over unordered k-tuples of pairwise disjoint size-s
// supports. Tuples are visited in lexicographic order of their concatenation
// (blocks ordered by smallest element); on ties the first tuple seen is kept,
// so the reported supports are the lexicographically smallest optimum.
// Throws CapacityExceeded when the tuple count exceeds max_instances.
OracleResult brute_force_opt(const PsdMatrix& a, std::size_t k, std::size_t s,
                             std::uint64_t max_instances = 10'000'000);

struct TPowerOptions {
  std::size_t iters = 200;
  std::size_t restarts = 20;
  std::uint64_t seed = 0;
};

// Truncated power iteration for one s-sparse component. Restart number t is
// seeded with opt.seed + t; the restart with the largest objective wins and
// ties keep the earlier restart. When `trajectory` is non-null it receives the
// objective after every iterate of the winning restart (nondecreasing for PSD
// input).
SparseColumn tpower_single(const PsdMatrix& a, std::size_t s,
                           const TPowerOptions& opt = {},
                           std::vector<double>* trajectory = nullptr);

// Single-component subroutine slot used by deflation.
using SingleSolver =
    std::function<SparseColumn(const PsdMatrix&, std::size_t)>;

// Exhaustive single component: best size-s support by largest restricted
// eigenvalue, lexicographically smallest support on ties.
SingleSolver exact_single_solver(std::uint64_t max_instances = 10'000'000);

SingleSolver tpower_solver(TPowerOptions opt = {});

// Variable-removal deflation: solve one component on the surviving principal
// submatrix, delete its support, repeat k times.
ComponentSet deflate_greedy(const PsdMatrix& a, std::size_t k, std::size_t s,
                            const SingleSolver& single);

// 4x4 family on which deflation is suboptimal for k = s = 2: coordinates
// {0,3} are coupled with strength eps and carry the top eigenvalue 1 + eps,
// but claiming them first leaves only the weak pair {1,2} worth delta.
PsdMatrix deflation_gap_instance(double eps, double delta);

}  // namespace spca
