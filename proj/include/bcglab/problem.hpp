#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "bcglab/matrix.hpp"

namespace bcglab {

/// A x = b, with the truth x* attached when the problem was synthesized.
struct LinearProblem {
  Matrix a;
  Vector b;
  std::optional<Vector> truth;

  std::size_t rows() const noexcept { return a.rows(); }
  std::size_t cols() const noexcept { return a.cols(); }
  bool is_square() const noexcept { return a.is_square(); }

  /// Throws DimensionMismatch / NonFinite on malformed input.
  void validate() const;

  bool operator==(const LinearProblem&) const = default;
};

/// Haar-random orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(std::size_t n, std::uint64_t seed, std::string_view label = "orthogonal");

/// Q diag(lambda) Q^T with log-spaced eigenvalues in [1, condition].
Matrix random_spd_matrix(std::size_t d, std::uint64_t seed, double condition = 10.0);

/// x* ~ N(0, I), b = A x*.
LinearProblem random_spd_problem(std::size_t d, std::uint64_t seed, double condition = 10.0);

/// Invertible non-symmetric U diag(sigma) V^T, sigma log-spaced in [1, condition].
LinearProblem random_nonsymmetric_problem(std::size_t d, std::uint64_t seed,
                                          double condition = 10.0);

/// G1 G2^T with G1 (c x r), G2 (d x r) standard Gaussian.
Matrix random_rank_matrix(std::size_t c, std::size_t d, std::size_t rank, std::uint64_t seed);

enum class RhsKind { InRange, Generic };

/// Rank-deficient or rectangular problem. InRange draws b = A x' with x'
/// standard normal; Generic draws b standard normal in R^c. No truth.
LinearProblem random_rank_problem(std::size_t c, std::size_t d, std::size_t rank,
                                  std::uint64_t seed, RhsKind rhs = RhsKind::Generic);

}  // namespace bcglab
