#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spca {

// Dense row-major matrix of doubles. Deliberately minimal: just enough
// plumbing for the solver, not a general linear algebra layer.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return v_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return v_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) { return {v_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {v_.data() + i * cols_, cols_};
  }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  double max_abs() const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace spca
