#pragma once

// Row-major dense matrix and vector helpers. Arithmetic inner loops go
// through the dispatched kernels in kernels.hpp.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bcglab {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  /// Columns of the result are the given vectors.
  static Matrix from_columns(std::span<const Vector> columns, std::size_t dim);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  Vector column(std::size_t j) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Vector helpers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
bool all_finite(std::span<const double> a) noexcept;

// Matrix helpers.
Vector matvec(const Matrix& a, std::span<const double> x);
/// A^T x
Vector matvec_t(const Matrix& a, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);
/// A^T B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// A B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);
Matrix symmetrized(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
/// Infinity norm of A - A^T; returns +inf for non-square input.
double asymmetry(const Matrix& a);
double trace(const Matrix& a);
/// Leading columns [0, count).
Matrix leading_columns(const Matrix& a, std::size_t count);

}  // namespace bcglab
