#include "bcglab/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace bcglab::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* a, std::size_t rows, std::size_t cols, const double* x,
               double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_neon(a + i * cols, x, cols);
}

void gemv_t_neon(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy_neon(x[i], a + i * cols, y, cols);
}

}  // namespace

const KernelTable neon_table{Isa::Neon, dot_neon, axpy_neon, gemv_neon, gemv_t_neon};

}  // namespace bcglab::kernels::detail

#endif
