#pragma once

// Prior construction for BayesCG: the prior belief N(x0, Sigma0) and the
// covariance action v -> Sigma0 v the solver actually consumes.

#include <cstdint>
#include <optional>
#include <string_view>

#include "bcglab/gaussian.hpp"
#include "bcglab/problem.hpp"

namespace bcglab {

enum class PriorKind { Identity, UserCovariance, InverseA, NaturalPrecision, SparseDiagonal };

std::string_view prior_kind_name(PriorKind kind) noexcept;

struct PriorSpec {
  PriorKind kind = PriorKind::Identity;
  Matrix covariance;            // UserCovariance
  Vector diagonal;              // SparseDiagonal
  std::optional<Vector> mean;   // defaults to zero
  FactorKind factor = FactorKind::Cholesky;

  static PriorSpec of_kind(PriorKind kind) {
    PriorSpec s;
    s.kind = kind;
    return s;
  }
  static PriorSpec identity() { return {}; }
  static PriorSpec user(Matrix covariance, FactorKind factor = FactorKind::Cholesky);
  static PriorSpec inverse_a() { return of_kind(PriorKind::InverseA); }
  static PriorSpec natural() { return of_kind(PriorKind::NaturalPrecision); }
  static PriorSpec sparse_diagonal(Vector diagonal);

  bool operator==(const PriorSpec&) const = default;
};

class PriorModel {
 public:
  PriorKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return mean_.size(); }
  const Vector& mean() const noexcept { return mean_; }

  /// Sigma0 v.
  Vector apply(std::span<const double> v) const;
  /// Multiply-adds per apply(), for operation accounting.
  std::uint64_t apply_cost() const noexcept;

  bool has_factor() const noexcept { return factor_.has_value(); }
  /// Prior belief; requires the factor (built unless make_prior was asked
  /// for the action only).
  GaussianBelief belief() const;
  const Matrix& factor() const;

  Matrix covariance() const;
  Matrix precision() const;
  double covariance_trace() const;

 private:
  friend PriorModel make_prior(const PriorSpec&, const LinearProblem&, bool);

  PriorKind kind_ = PriorKind::Identity;
  Vector mean_;
  Matrix dense_;        // UserCovariance: Sigma0
  Matrix chol_;         // InverseA: chol(A); Natural: chol(A^T A)
  Vector diag_;         // SparseDiagonal
  std::optional<Matrix> factor_;
  double trace_ = 0.0;
};

/// Validates the spec against the problem (InvalidPrior on failure). For
/// the natural prior only the precision A^T A is factored; its covariance
/// action is a pair of triangular solves and the covariance factor is
/// L^{-T}, never the explicit inverse.
PriorModel make_prior(const PriorSpec& spec, const LinearProblem& problem,
                      bool with_factor = true);

}  // namespace bcglab
