#pragma once

#include <cstddef>
#include <vector>

#include "spca/dense.hpp"

namespace spca {

// One group of support index sets, k lists of exactly s sorted, pairwise
// disjoint variable indices.
using SupportSet = std::vector<std::vector<int>>;

// One sparse component: support indices (sorted ascending) plus the value
// aligned with each index. The stored support always has exactly s entries,
// even when some of the values are zero.
struct SparseColumn {
  std::vector<int> support;
  std::vector<double> values;
};

// A d x k block of unit-norm columns with pairwise disjoint supports.
struct ComponentSet {
  std::size_t dim = 0;       // d
  std::size_t count = 0;     // k
  std::size_t sparsity = 0;  // s
  std::vector<SparseColumn> columns;

  SupportSet supports() const;
  Matrix dense() const;
};

// Throws InternalInvariantViolation when the structural invariants (support
// sizes, sortedness, disjointness, unit column norms) do not hold.
void validate_components(const ComponentSet& x, double norm_tol = 1e-9);

}  // namespace spca
