#pragma once

#include <cstddef>
#include <vector>

#include "spca/components.hpp"
#include "spca/dense.hpp"

namespace spca {

// Bipartite structure behind the support-selection step: k groups of s
// interchangeable placeholder slots on one side, d variables on the other,
// and the edge from group j to variable i weighted by W_ij^2. Placeholders
// inside a group are identical, so the graph keeps one weight row per group
// plus the capacity s instead of duplicating rows.
struct WeightedBipartiteGraph {
  std::size_t k = 0;
  std::size_t s = 0;
  std::size_t d = 0;
  Matrix w;  // k x d, nonnegative
};

// W is d x k. Throws InfeasibleSparsity when s*k > d.
WeightedBipartiteGraph gen_bigraph(const Matrix& w_cols, std::size_t s);

struct MatchingResult {
  std::vector<int> group_of_var;  // d entries, -1 when unassigned
  double total_weight = 0.0;
};

// Maximum-weight assignment of exactly s distinct variables to every group.
// Among equal-weight optima the result is canonical: the lexicographically
// smallest assignment vector read in variable order, where a lower group
// index wins and "unassigned" sorts last.
MatchingResult max_weight_perfect_matching(const WeightedBipartiteGraph& g);

// Regroups an assignment into k sorted support lists.
SupportSet supports_from_matching(const MatchingResult& m, std::size_t k,
                                  std::size_t s);

}  // namespace spca
