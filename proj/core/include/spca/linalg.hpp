#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spca/components.hpp"
#include "spca/dense.hpp"

namespace spca {

// n x d sample-by-feature data. `centered` records whether columns have been
// mean-centered already.
struct DataMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  Matrix values;  // n x d
  bool centered = false;
};

// Symmetric matrix wrapper. Construction symmetrizes by averaging and rejects
// input whose asymmetry exceeds tol * max|A|. Positive semidefiniteness is a
// caller-side contract; assert_psd() checks it explicitly where needed.
class PsdMatrix {
 public:
  PsdMatrix() = default;
  static PsdMatrix from_dense(Matrix a, double sym_tol = 1e-12);

  std::size_t dim() const { return a_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }
  const Matrix& values() const { return a_; }

  double trace() const;

  // Throws InvalidInput unless all eigenvalues are >= -tol * lambda_1.
  void assert_psd(double tol = 1e-9) const;

 private:
  Matrix a_;
};

// Truncated eigendecomposition A ~= U diag(lambda) U^T with
// lambda_1 >= ... >= lambda_r > 0.
struct EigFactor {
  std::size_t dim = 0;
  std::size_t rank = 0;
  Matrix eigvecs;                // d x r, orthonormal columns
  std::vector<double> eigvals;   // r, descending
  double source_trace = 0.0;     // trace of the input matrix

  // U diag(sqrt(lambda)), the d x r factor the candidate scan multiplies by.
  Matrix scaled_basis() const;
};

// (1/n) S^T S when normalize is true, S^T S otherwise, with optional column
// centering applied first.
PsdMatrix gram_from_data(const DataMatrix& s, bool center, bool normalize = true);

// Deterministic symmetric eigensolver: cyclic Jacobi sweeps for d <= 64,
// Householder tridiagonalization + implicit-shift QL above. Eigenvalues sorted
// descending; eigenvalues <= max(rel_tol * lambda_1, 1e-14) are dropped.
// Sign convention: in each eigenvector the entry of largest magnitude
// (lowest index on ties) is made positive. Throws ZeroMatrix when nothing
// survives truncation.
EigFactor sym_eig_truncated(const PsdMatrix& a,
                            std::optional<std::size_t> rank_cap = std::nullopt,
                            double rel_tol = 1e-12);

// Full decomposition of a symmetric matrix (no truncation, descending order,
// same sign convention). Exposed for sketching and tests.
void sym_eig_full(const Matrix& a, std::vector<double>& eigvals, Matrix& eigvecs);

// Tr(X^T A X) and its per-column terms.
double explained_variance(const PsdMatrix& a, const ComponentSet& x);
std::vector<double> per_component_variance(const PsdMatrix& a,
                                           const ComponentSet& x);

struct SubmatrixEig {
  double lambda = 0.0;
  std::vector<double> vector;  // d-dimensional, zero off the index set
};

// Largest eigenvalue of A restricted to `indices`, with its eigenvector
// embedded back into d coordinates (same sign convention as above).
SubmatrixEig principal_submatrix_lambda_max(const PsdMatrix& a,
                                            std::span<const int> indices);

}  // namespace spca
