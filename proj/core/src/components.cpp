#include "spca/components.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "spca/errors.hpp"

namespace spca {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::InfeasibleSparsity: return "InfeasibleSparsity";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InternalInvariantViolation: return "InternalInvariantViolation";
  }
  return "UnknownError";
}

SupportSet ComponentSet::supports() const {
  SupportSet s;
  s.reserve(columns.size());
  for (const auto& col : columns) s.push_back(col.support);
  return s;
}

Matrix ComponentSet::dense() const {
  Matrix x(dim, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& col = columns[j];
    for (std::size_t p = 0; p < col.support.size(); ++p) {
      x(col.support[p], j) = col.values[p];
    }
  }
  return x;
}

void validate_components(const ComponentSet& x, double norm_tol) {
  require_invariant(x.columns.size() == x.count,
                    "ComponentSet: column count mismatch");
  std::vector<char> used(x.dim, 0);
  for (const auto& col : x.columns) {
    require_invariant(col.support.size() == x.sparsity,
                      "ComponentSet: support size != s");
    require_invariant(col.values.size() == col.support.size(),
                      "ComponentSet: values not aligned with support");
    double ss = 0.0;
    int prev = -1;
    for (std::size_t p = 0; p < col.support.size(); ++p) {
      const int i = col.support[p];
      require_invariant(i >= 0 && static_cast<std::size_t>(i) < x.dim,
                        "ComponentSet: support index out of range");
      require_invariant(i > prev, "ComponentSet: support not strictly ascending");
      require_invariant(!used[i], "ComponentSet: supports overlap");
      used[i] = 1;
      prev = i;
      ss += col.values[p] * col.values[p];
    }
    require_invariant(std::fabs(std::sqrt(ss) - 1.0) <= norm_tol,
                      "ComponentSet: column norm is not 1 (got " +
                          std::to_string(std::sqrt(ss)) + ")");
  }
}

}  // namespace spca
