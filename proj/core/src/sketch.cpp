#include "spca/sketch.hpp"

#include <cmath>

#include "spca/errors.hpp"
#include "spca/rng.hpp"

namespace spca {

namespace {

void check_sketch_params(const PsdMatrix& a, std::size_t r) {
  if (a.dim() == 0) fail(ErrorCode::InvalidInput, "sketch: empty matrix");
  if (r == 0) fail(ErrorCode::InvalidInput, "sketch: rank must be >= 1");
}

// Exactly symmetric in floating point: (MM^T)_ij and (MM^T)_ji are the same
// sum evaluated in the same order.
Matrix gram_of_factor(const Matrix& m) { return matmul(m, transpose(m)); }

double lambda_max_of_difference(const PsdMatrix& a, const Matrix& a_bar) {
  const std::size_t d = a.dim();
  Matrix diff(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) diff(i, j) = a(i, j) - a_bar(i, j);
  std::vector<double> vals;
  Matrix vecs;
  sym_eig_full(diff, vals, vecs);
  return vals.empty() ? 0.0 : vals.front();
}

}  // namespace

const char* sketch_method_name(SketchMethod m) {
  switch (m) {
    case SketchMethod::TruncatedSvd:
      return "svd";
    case SketchMethod::GaussianJl:
      return "gauss";
  }
  return "?";
}

SketchResult svd_sketch(const PsdMatrix& a, std::size_t r) {
  check_sketch_params(a, r);
  const std::size_t d = a.dim();

  std::vector<double> vals;
  Matrix vecs;
  sym_eig_full(a.values(), vals, vecs);

  const double floor = std::max(1e-14, 1e-14 * std::abs(vals.front()));
  std::size_t kept = 0;
  while (kept < std::min(r, d) && vals[kept] > floor) ++kept;
  if (kept == 0) fail(ErrorCode::ZeroMatrix, "svd_sketch: no positive spectrum");

  SketchResult out;
  out.method = SketchMethod::TruncatedSvd;
  out.rank = r;

  out.factor.dim = d;
  out.factor.rank = kept;
  out.factor.eigvals.assign(vals.begin(), vals.begin() + kept);
  out.factor.eigvecs = Matrix(d, kept);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < kept; ++j) out.factor.eigvecs(i, j) = vecs(i, j);
  double tr = 0.0;
  for (std::size_t j = 0; j < kept; ++j) tr += vals[j];
  out.factor.source_trace = tr;

  out.a_bar = PsdMatrix::from_dense(gram_of_factor(out.factor.scaled_basis()));
  out.error_lambda1 = kept < d ? std::max(vals[kept], 0.0) : 0.0;
  return out;
}

SketchResult gaussian_sketch(const PsdMatrix& a, std::size_t r,
                             std::uint64_t seed) {
  check_sketch_params(a, r);
  const std::size_t d = a.dim();

  std::vector<double> vals;
  Matrix vecs;
  sym_eig_full(a.values(), vals, vecs);

  std::size_t m = 0;
  while (m < d && vals[m] > 0.0) ++m;
  if (m == 0) fail(ErrorCode::ZeroMatrix, "gaussian_sketch: no positive spectrum");

  Matrix v(d, m);
  for (std::size_t j = 0; j < m; ++j) {
    const double s = std::sqrt(vals[j]);
    for (std::size_t i = 0; i < d; ++i) v(i, j) = vecs(i, j) * s;
  }

  // Row-major fill order is part of the reproducibility contract.
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  Matrix rmat(m, r);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < r; ++j) rmat(i, j) = rng.normal() * scale;

  SketchResult out;
  out.method = SketchMethod::GaussianJl;
  out.rank = r;
  out.seed = seed;
  out.sampler = "mt19937_64/box-muller";

  out.a_bar = PsdMatrix::from_dense(gram_of_factor(matmul(v, rmat)));
  out.factor = sym_eig_truncated(out.a_bar, r);
  out.error_lambda1 =
      std::max(lambda_max_of_difference(a, out.a_bar.values()), 0.0);
  return out;
}

double sketch_error_term(const SketchResult& sk, std::size_t k) {
  return 2.0 * static_cast<double>(k) * sk.error_lambda1;
}

}  // namespace spca
