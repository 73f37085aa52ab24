#pragma once

// Counter-based random streams.
//
// Every random quantity derives from one 64-bit experiment seed. A stream
// is identified by (seed, label, index) and its key is
//
//   key = mix64(mix64(seed ^ fnv1a64(label)) + (index + 1) * kGoldenGamma)
//
// The n-th 64-bit output (n = 1, 2, ...) of a stream is
// mix64(key + n * kGoldenGamma), i.e. SplitMix64 run as a pure function of a
// counter. Uniforms take the top 53 bits; normals come from Box-Muller pairs
// (cosine branch first, then sine). The rule is language-independent.

#include <cstdint>
#include <string_view>

#include "bcglab/matrix.hpp"

namespace bcglab {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::string_view label,
                                   std::uint64_t index = 0) noexcept {
  return mix64(mix64(seed ^ fnv1a64(label)) + (index + 1) * kGoldenGamma);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}
  RandomStream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) noexcept
      : key_(derive_key(seed, label, index)) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGoldenGamma); }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() noexcept;

  Vector normal_vector(std::size_t n);
  Matrix normal_matrix(std::size_t rows, std::size_t cols);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bcglab
