#pragma once

// Dense inner-loop kernels with a scalar reference implementation and
// SIMD variants selected once at runtime from the host CPU.
//
// All matrices are row-major and contiguous. The SIMD variants may
// reassociate sums, so they agree with the scalar reference to rounding,
// not bit-for-bit. Within one process the selected variant never changes,
// which keeps every solve deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace bcglab::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = A x, A is rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);
  // y = A^T x, A is rows x cols, y has cols entries
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
};

/// True if the variant was compiled in and the host CPU supports it.
bool available(Isa isa) noexcept;

/// Kernel table for a specific variant. Falls back to scalar when the
/// variant is unavailable.
const KernelTable& table(Isa isa) noexcept;

/// The table chosen for this process. Honors BAYESCG_LAB_KERNELS
/// (scalar|avx2|neon|auto); auto picks the widest available variant.
const KernelTable& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
#if defined(__aarch64__)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace bcglab::kernels
