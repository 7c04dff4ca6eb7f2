#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spca/components.hpp"
#include "spca/linalg.hpp"
#include "spca/sphere_net.hpp"

namespace spca {

struct SolverConfig {
  std::size_t k = 1;
  std::size_t s = 1;
  double eps = 0.5;
  // Re-score the winning supports with exact principal submatrix
  // eigenvectors. Off by default here; the CLI turns it on.
  bool polish = false;
  bool antipodal_reduce = true;
  NetConstruction net_construction = NetConstruction::AngularGrid;
  std::uint64_t seed = 0;  // used by GreedyCover nets
  std::optional<double> time_budget_ms;
  unsigned workers = 1;
};

enum class Termination { Complete, TimeBudget };

struct SolveReport {
  ComponentSet best;
  double objective = 0.0;
  std::vector<double> per_component;
  std::uint64_t net_points_total = 0;     // candidates in the full scan
  std::uint64_t net_points_examined = 0;  // candidates actually scored
  double guarantee_factor = 0.0;          // 1 - eps when the scan completed
  double elapsed_ms = 0.0;
  Termination termination = Termination::Complete;
};

// Best disjoint-support solution for one fixed weight matrix W (d x k):
// supports come from the max-weight matching over squared entries, values
// from normalizing W restricted to each support. A column whose restricted
// weight vanishes falls back to a canonical unit vector on its support.
// Column signs are canonicalized (largest-magnitude value positive) so that
// W and -W produce identical output.
ComponentSet candidate_solution(const Matrix& w, std::size_t s);

// Scans the k-fold candidate grid built on F's spectral factor, scoring every
// candidate against a_eval, and returns the best solution found. With
// identical inputs the result is independent of the worker count; ties
// between equal objectives go to the smaller candidate index.
SolveReport solve_multi_spca(const EigFactor& f, const PsdMatrix& a_eval,
                             const SolverConfig& cfg);

// Exact re-scoring of fixed supports: each column becomes the leading
// eigenvector of its principal submatrix. Never decreases the objective.
ComponentSet polish(const PsdMatrix& a, const SupportSet& supports);

}  // namespace spca
