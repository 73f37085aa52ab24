#include "bcglab/kernels.hpp"

namespace bcglab::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_scalar(a + i * cols, x, cols);
}

void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy_scalar(x[i], a + i * cols, y, cols);
}

}  // namespace

const KernelTable scalar_table{Isa::Scalar, dot_scalar, axpy_scalar, gemv_scalar,
                               gemv_t_scalar};

}  // namespace bcglab::kernels::detail
