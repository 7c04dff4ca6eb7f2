#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "spca/linalg.hpp"

namespace spca {

enum class SketchMethod { TruncatedSvd, GaussianJl };

const char* sketch_method_name(SketchMethod m);

// Low-rank stand-in for an evaluation matrix: the sketched matrix itself, the
// factor the candidate scan consumes, and the spectral error of substituting
// a_bar for the original.
struct SketchResult {
  PsdMatrix a_bar;
  EigFactor factor;  // factor of a_bar; rank <= requested r
  SketchMethod method = SketchMethod::TruncatedSvd;
  std::size_t rank = 0;        // requested rank r
  std::uint64_t seed = 0;      // used by GaussianJl only
  double error_lambda1 = 0.0;  // max(lambda_max(a - a_bar), 0)
  std::string sampler;         // RNG recipe, empty for TruncatedSvd
};

// Best rank-r approximation: keep the top r eigenpairs. The spectral error is
// exactly the first discarded eigenvalue.
SketchResult svd_sketch(const PsdMatrix& a, std::size_t r);

// Random projection: write a = V V^T with V = U sqrt(Lambda), draw R with
// N(0, 1/r) entries and use a_bar = (VR)(VR)^T. The spectral error is computed
// exactly rather than bounded.
SketchResult gaussian_sketch(const PsdMatrix& a, std::size_t r,
                             std::uint64_t seed);

// Additive objective slack incurred by solving on a_bar instead of a:
// 2k * max(lambda_max(a - a_bar), 0).
double sketch_error_term(const SketchResult& sk, std::size_t k);

}  // namespace spca
