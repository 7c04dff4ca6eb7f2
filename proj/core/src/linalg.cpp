#include "spca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "spca/errors.hpp"

namespace spca {
namespace {

// Cyclic Jacobi sweeps. Good and simple up to a few dozen dimensions; the
// rotation angles depend only on entry ratios, so the factor is scale
// equivariant up to roundoff.
void jacobi_eig(Matrix a, std::vector<double>& w, Matrix& v) {
  const std::size_t n = a.rows();
  v = Matrix::identity(n);
  w.assign(n, 0.0);
  if (n == 0) return;
  if (n == 1) {
    w[0] = a(0, 0);
    return;
  }
  const double scale = a.max_abs();
  if (scale == 0.0) return;

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(2.0 * off) <= 1e-15 * scale * static_cast<double>(n)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-18 * scale) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = ((theta >= 0.0) ? 1.0 : -1.0) /
              (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double h = t * apq;

        a(p, p) = app - h;
        a(q, q) = aqq + h;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < p; ++r) {
          const double g = a(r, p);
          const double hh = a(r, q);
          a(r, p) = a(p, r) = g - s * (hh + g * tau);
          a(r, q) = a(q, r) = hh + s * (g - hh * tau);
        }
        for (std::size_t r = p + 1; r < q; ++r) {
          const double g = a(p, r);
          const double hh = a(r, q);
          a(p, r) = a(r, p) = g - s * (hh + g * tau);
          a(r, q) = a(q, r) = hh + s * (g - hh * tau);
        }
        for (std::size_t r = q + 1; r < n; ++r) {
          const double g = a(p, r);
          const double hh = a(q, r);
          a(p, r) = a(r, p) = g - s * (hh + g * tau);
          a(q, r) = a(r, q) = hh + s * (g - hh * tau);
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double g = v(r, p);
          const double hh = v(r, q);
          v(r, p) = g - s * (hh + g * tau);
          v(r, q) = hh + s * (g - hh * tau);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) w[i] = a(i, i);
}

// Householder reduction to tridiagonal form with accumulated transform.
// Classic tred2 restructured for row-major storage.
void tred2(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const int n = static_cast<int>(z.rows());
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::fabs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal produced by tred2.
void tqli(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) {
          fail(ErrorCode::InternalInvariantViolation,
               "sym_eig: QL iteration failed to converge");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          e[i + 1] = r = std::hypot(f, g);
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void sort_descending(std::vector<double>& w, Matrix& v) {
  const std::size_t n = w.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  std::vector<double> ws(n);
  Matrix vs(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    ws[j] = w[order[j]];
    for (std::size_t i = 0; i < n; ++i) vs(i, j) = v(i, order[j]);
  }
  w = std::move(ws);
  v = std::move(vs);
}

// Make the largest-magnitude entry of each column positive; on exact ties the
// lowest index decides. Keeps factor output reproducible.
void canonicalize_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    std::size_t arg = 0;
    double best = std::fabs(v(0, j));
    for (std::size_t i = 1; i < v.rows(); ++i) {
      const double m = std::fabs(v(i, j));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (v(arg, j) < 0.0) {
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    }
  }
}

}  // namespace

void sym_eig_full(const Matrix& a, std::vector<double>& eigvals, Matrix& eigvecs) {
  if (a.rows() != a.cols()) {
    fail(ErrorCode::InvalidInput, "sym_eig: matrix is not square");
  }
  if (!a.all_finite()) {
    fail(ErrorCode::InvalidInput, "sym_eig: matrix has non-finite entries");
  }
  if (a.rows() <= 64) {
    jacobi_eig(a, eigvals, eigvecs);
  } else {
    eigvecs = a;
    std::vector<double> off;
    tred2(eigvecs, eigvals, off);
    tqli(eigvals, off, eigvecs);
  }
  sort_descending(eigvals, eigvecs);
  canonicalize_signs(eigvecs);
}

PsdMatrix PsdMatrix::from_dense(Matrix a, double sym_tol) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    fail(ErrorCode::InvalidInput, "PsdMatrix: matrix must be square and non-empty");
  }
  if (!a.all_finite()) {
    fail(ErrorCode::InvalidInput, "PsdMatrix: matrix has non-finite entries");
  }
  const double scale = a.max_abs();
  double asym = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      asym = std::max(asym, std::fabs(a(i, j) - a(j, i)));
    }
  }
  if (asym > sym_tol * std::max(1.0, scale)) {
    fail(ErrorCode::InvalidInput,
         "PsdMatrix: asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = m;
    }
  }
  PsdMatrix out;
  out.a_ = std::move(a);
  return out;
}

double PsdMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += a_(i, i);
  return t;
}

void PsdMatrix::assert_psd(double tol) const {
  std::vector<double> w;
  Matrix v;
  sym_eig_full(a_, w, v);
  if (w.empty()) return;
  const double top = std::max(w.front(), 0.0);
  const double floor = -tol * top - 1e-30;
  if (w.back() < floor) {
    fail(ErrorCode::InvalidInput,
         "matrix is not positive semidefinite: lambda_min = " +
             std::to_string(w.back()));
  }
}

PsdMatrix gram_from_data(const DataMatrix& s, bool center, bool normalize) {
  if (s.n == 0 || s.d == 0 || s.values.rows() != s.n || s.values.cols() != s.d) {
    fail(ErrorCode::InvalidInput, "gram_from_data: empty or inconsistent data");
  }
  if (!s.values.all_finite()) {
    fail(ErrorCode::InvalidInput, "gram_from_data: data has non-finite entries");
  }
  Matrix x = s.values;
  if (center) {
    for (std::size_t j = 0; j < s.d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) mean += x(i, j);
      mean /= static_cast<double>(s.n);
      for (std::size_t i = 0; i < s.n; ++i) x(i, j) -= mean;
    }
  }
  const double inv = normalize ? 1.0 / static_cast<double>(s.n) : 1.0;
  Matrix g(s.d, s.d);
  for (std::size_t a = 0; a < s.d; ++a) {
    for (std::size_t b = a; b < s.d; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) acc += x(i, a) * x(i, b);
      g(a, b) = g(b, a) = acc * inv;
    }
  }
  return PsdMatrix::from_dense(std::move(g));
}

Matrix EigFactor::scaled_basis() const {
  Matrix b = eigvecs;
  for (std::size_t j = 0; j < rank; ++j) {
    const double f = std::sqrt(eigvals[j]);
    for (std::size_t i = 0; i < dim; ++i) b(i, j) *= f;
  }
  return b;
}

EigFactor sym_eig_truncated(const PsdMatrix& a,
                            std::optional<std::size_t> rank_cap,
                            double rel_tol) {
  if (a.dim() == 0) fail(ErrorCode::InvalidInput, "sym_eig: empty matrix");
  if (a.values().max_abs() == 0.0) {
    fail(ErrorCode::ZeroMatrix, "sym_eig: matrix is identically zero");
  }
  std::vector<double> w;
  Matrix v;
  sym_eig_full(a.values(), w, v);

  const double lambda1 = w.front();
  if (!(lambda1 > 0.0)) {
    fail(ErrorCode::ZeroMatrix, "sym_eig: no positive eigenvalues");
  }
  const double cutoff = std::max(rel_tol * lambda1, 1e-14);
  std::size_t r = 0;
  while (r < w.size() && w[r] > cutoff) ++r;
  if (rank_cap && *rank_cap < r) r = *rank_cap;
  if (r == 0) fail(ErrorCode::ZeroMatrix, "sym_eig: spectrum below cutoff");

  EigFactor f;
  f.dim = a.dim();
  f.rank = r;
  f.eigvals.assign(w.begin(), w.begin() + r);
  f.eigvecs = Matrix(f.dim, r);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < f.dim; ++i) f.eigvecs(i, j) = v(i, j);
  }
  f.source_trace = a.trace();
  return f;
}

std::vector<double> per_component_variance(const PsdMatrix& a,
                                           const ComponentSet& x) {
  if (x.dim != a.dim()) {
    fail(ErrorCode::InvalidInput,
         "explained_variance: component dimension does not match matrix");
  }
  std::vector<double> out;
  out.reserve(x.columns.size());
  for (const auto& col : x.columns) {
    double acc = 0.0;
    for (std::size_t p = 0; p < col.support.size(); ++p) {
      for (std::size_t q = 0; q < col.support.size(); ++q) {
        acc += col.values[p] * a(col.support[p], col.support[q]) * col.values[q];
      }
    }
    out.push_back(acc);
  }
  return out;
}

double explained_variance(const PsdMatrix& a, const ComponentSet& x) {
  const auto per = per_component_variance(a, x);
  double total = 0.0;
  for (double t : per) total += t;
  return total;
}

SubmatrixEig principal_submatrix_lambda_max(const PsdMatrix& a,
                                            std::span<const int> indices) {
  const std::size_t m = indices.size();
  if (m == 0) fail(ErrorCode::InvalidInput, "submatrix_lambda_max: empty index set");
  for (std::size_t p = 0; p < m; ++p) {
    if (indices[p] < 0 || static_cast<std::size_t>(indices[p]) >= a.dim()) {
      fail(ErrorCode::InvalidInput, "submatrix_lambda_max: index out of range");
    }
    if (p > 0 && indices[p] <= indices[p - 1]) {
      fail(ErrorCode::InvalidInput,
           "submatrix_lambda_max: indices must be strictly ascending");
    }
  }
  Matrix sub(m, m);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < m; ++q) sub(p, q) = a(indices[p], indices[q]);
  }
  std::vector<double> w;
  Matrix v;
  sym_eig_full(sub, w, v);

  SubmatrixEig out;
  out.lambda = w.front();
  out.vector.assign(a.dim(), 0.0);
  for (std::size_t p = 0; p < m; ++p) out.vector[indices[p]] = v(p, 0);
  return out;
}

}  // namespace spca
