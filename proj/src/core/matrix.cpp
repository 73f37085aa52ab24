#include "bcglab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bcglab/errors.hpp"
#include "bcglab/kernels.hpp"

namespace bcglab {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::DimensionMismatch, what);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  require(data_.size() == rows_ * cols_, "Matrix: entry count does not match shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_columns(std::span<const Vector> columns, std::size_t dim) {
  Matrix m(dim, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    require(columns[j].size() == dim, "from_columns: column dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: size mismatch");
  return kernels::dot(a, b);
}

double norm2(std::span<const double> a) {
  // Scaled accumulation keeps tiny residuals from underflowing to zero.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : a) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: size mismatch");
  kernels::axpy(alpha, x, y);
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "add: size mismatch");
  Vector out(a.begin(), a.end());
  kernels::axpy(1.0, b, out);
  return out;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "sub: size mismatch");
  Vector out(a.begin(), a.end());
  kernels::axpy(-1.0, b, out);
  return out;
}

Vector scaled(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

bool all_finite(std::span<const double> a) noexcept {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: size mismatch");
  Vector y(a.rows());
  kernels::active().gemv(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Vector matvec_t(const Matrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "matvec_t: size mismatch");
  Vector y(a.cols());
  kernels::active().gemv_t(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip != 0.0) k.axpy(aip, b.row(p).data(), ci.data(), b.cols());
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn: row mismatch");
  Matrix c(a.cols(), b.cols());
  const auto& k = kernels::active();
  for (std::size_t p = 0; p < a.rows(); ++p) {
    const auto ap = a.row(p);
    const auto bp = b.row(p);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      if (ap[i] != 0.0) k.axpy(ap[i], bp.data(), c.row(i).data(), b.cols());
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt: column mismatch");
  Matrix c(a.rows(), b.rows());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  Matrix c = a;
  kernels::axpy(1.0, b.data(), c.data());
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  Matrix c = a;
  kernels::axpy(-1.0, b.data(), c.data());
  return c;
}

Matrix scaled(const Matrix& a, double s) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Matrix symmetrized(const Matrix& a) {
  require(a.is_square(), "symmetrized: matrix not square");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double asymmetry(const Matrix& a) {
  if (!a.is_square()) return std::numeric_limits<double>::infinity();
  // Infinity norm: max row sum of |A - A^T|.
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) row += std::abs(a(i, j) - a(j, i));
    worst = std::max(worst, row);
  }
  return worst;
}

double trace(const Matrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

Matrix leading_columns(const Matrix& a, std::size_t count) {
  count = std::min(count, a.cols());
  Matrix out(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = a(i, j);
  return out;
}

}  // namespace bcglab
