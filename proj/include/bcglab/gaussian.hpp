#pragma once

// Dense Gaussian primitives: square roots, pseudo-inverses, numerical rank,
// weighted projections, sampling and distances between Gaussian beliefs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bcglab/matrix.hpp"

namespace bcglab {

/// N(mean, factor * factor^T). The covariance is never stored directly, so
/// it stays symmetric PSD by construction. A factor with zero columns is a
/// Dirac at the mean.
struct GaussianBelief {
  Vector mean;
  Matrix covariance_factor;
  std::size_t rank_hint = 0;

  static GaussianBelief dirac(Vector mean);
  static GaussianBelief from_factor(Vector mean, Matrix factor);

  std::size_t dim() const noexcept { return mean.size(); }
  bool is_dirac() const noexcept { return covariance_factor.cols() == 0; }
  Matrix covariance() const;
  double covariance_trace() const;

  bool operator==(const GaussianBelief&) const = default;
};

enum class FactorKind { Cholesky, SymmetricSqrt };

/// Largest eigenvalue magnitude times this is the default clamping and
/// symmetry tolerance for PSD checks.
inline constexpr double kDefaultPsdRelativeTol = 1e-9;

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns, matching values
};

SymmetricEigen symmetric_eigen(const Matrix& m);

/// Unique symmetric PSD R with R R = M. Eigenvalues in [-tol, 0) clamp to
/// zero; tol < 0 selects kDefaultPsdRelativeTol * max|M_ij|.
Matrix sym_psd_sqrt(const Matrix& m, double tol = -1.0);

/// Lower-triangular L with L L^T = M.
Matrix cholesky_factor(const Matrix& m);

/// Solves L X = B for lower-triangular L.
Matrix solve_lower(const Matrix& l, const Matrix& b);
Vector solve_lower(const Matrix& l, std::span<const double> b);
/// Solves L^T X = B for lower-triangular L.
Matrix solve_lower_transposed(const Matrix& l, const Matrix& b);
Vector solve_lower_transposed(const Matrix& l, std::span<const double> b);
/// Solves (L L^T) x = b.
Vector cholesky_solve(const Matrix& l, std::span<const double> b);

/// max(rows, cols) * machine epsilon.
double default_rank_cutoff(const Matrix& m) noexcept;

Vector singular_values(const Matrix& m);

/// SVD pseudo-inverse; singular values <= cutoff * sigma_max count as zero.
Matrix pseudo_inverse(const Matrix& m, std::optional<double> cutoff = std::nullopt);

std::size_t numerical_rank(const Matrix& m, std::optional<double> cutoff = std::nullopt);

/// Orthonormal basis (as columns) for the column space of m.
Matrix orthonormal_basis(const Matrix& m, std::optional<double> cutoff = std::nullopt);

/// Largest principal angle (radians) between the column spaces of two
/// matrices with orthonormal columns of equal count.
double largest_principal_angle(const Matrix& q1, const Matrix& q2);

/// Factor with at most dim() columns and the same implied covariance.
Matrix compressed_factor(const Matrix& factor);

enum class WeightTag { Euclidean, AWeighted, Sigma0Weighted, ASigma0AtWeighted };

std::string_view weight_tag_name(WeightTag tag) noexcept;
std::optional<WeightTag> parse_weight_tag(std::string_view name) noexcept;

class InnerProductWeight {
 public:
  /// Validates symmetry and positive definiteness (InvalidWeight otherwise).
  InnerProductWeight(WeightTag tag, Matrix weight);
  static InnerProductWeight euclidean(std::size_t dim);

  WeightTag tag() const noexcept { return tag_; }
  const Matrix& matrix() const noexcept { return weight_; }
  std::size_t dim() const noexcept { return weight_.rows(); }

 private:
  WeightTag tag_;
  Matrix weight_;
};

/// Projection onto span(basis) that is self-adjoint in the W inner product:
/// P = V (V^T W V)^{-1} V^T W.
Matrix weighted_projection(std::span<const Vector> basis, const InnerProductWeight& w);

/// n draws mean + factor z, z standard normal; deterministic in seed.
std::vector<Vector> sample_gaussian(const GaussianBelief& belief, std::uint64_t seed,
                                    std::size_t n);

/// 2-Wasserstein distance between Gaussians. The covariance term is the
/// Bures distance, evaluated as min over orthogonal U of ||F_p - F_q U||_F
/// so small distances are not lost to cancellation.
double gaussian_w2_distance(const GaussianBelief& p, const GaussianBelief& q);

}  // namespace bcglab
