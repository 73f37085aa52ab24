#include <cstdlib>
#include <string_view>

#include "bcglab/kernels.hpp"

namespace bcglab::kernels {

bool available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) noexcept {
  if (!available(isa)) return detail::scalar_table;
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2:
      return detail::avx2_table;
#endif
#if defined(__aarch64__)
    case Isa::Neon:
      return detail::neon_table;
#endif
    default:
      return detail::scalar_table;
  }
}

namespace {

const KernelTable& select() noexcept {
  const char* env = std::getenv("BAYESCG_LAB_KERNELS");
  const std::string_view want = env ? env : "auto";
  if (want == "scalar") return table(Isa::Scalar);
  if (want == "avx2") return table(Isa::Avx2);
  if (want == "neon") return table(Isa::Neon);
  if (available(Isa::Avx2)) return table(Isa::Avx2);
  if (available(Isa::Neon)) return table(Isa::Neon);
  return table(Isa::Scalar);
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& chosen = select();
  return chosen;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace bcglab::kernels
