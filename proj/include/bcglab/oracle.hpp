#pragma once

// Ground-truth Gaussian machinery: exact conditioning of the prior on the
// solver's linear observations, the product measure mu_m that is exact on
// a Krylov space and prior-like elsewhere, and belief comparisons.

#include <optional>
#include <string>
#include <vector>

#include "bcglab/gaussian.hpp"
#include "bcglab/prior.hpp"
#include "bcglab/solver.hpp"

namespace bcglab {

/// Noise-free observations s_i^T A x = y_i.
struct LinearObservations {
  std::vector<Vector> directions;
  Vector values;
  Matrix op;

  /// The first m directions of a solver state, with y_i = s_i^T b.
  static LinearObservations from_state(const SolverState& state, const LinearProblem& problem,
                                       std::size_t m);

  bool operator==(const LinearObservations&) const = default;
};

/// Mean x0 + Sigma0 A^T S (S^T A Sigma0 A^T S)^{-1} (y - S^T A x0) and the
/// matching covariance, formed densely and refactored from its
/// eigendecomposition. Zero observations return the prior unchanged.
GaussianBelief exact_condition(const GaussianBelief& prior, const LinearObservations& obs);

/// N(P x* + (I - P) x0, (I - P) Sigma0 (I - P)^T), P the W-orthogonal
/// projection onto span(krylov_basis).
GaussianBelief build_mu_m(const GaussianBelief& prior, std::span<const double> truth,
                          std::span<const Vector> krylov_basis, const InnerProductWeight& w);

struct BeliefDistance {
  double mean_diff = 0.0;
  double cov_frobenius_diff = 0.0;
  double w2 = 0.0;

  bool operator==(const BeliefDistance&) const = default;
};

BeliefDistance compare_beliefs(const GaussianBelief& a, const GaussianBelief& b);

/// The four named inner products, each present only when its weight matrix
/// is symmetric positive definite for this problem. The Sigma0-weighted
/// product is <x, y> = x^T Sigma0^{-1} y, the prior's own geometry.
struct WeightSet {
  std::vector<InnerProductWeight> weights;
  std::vector<std::pair<WeightTag, std::string>> skipped;
};

WeightSet standard_weights(const LinearProblem& problem, const PriorModel& prior);

enum class KrylovCandidate {
  SearchSpace,    // span{s_1..s_m}, only when A is square
  SolutionSpace,  // span{Sigma0 A^T s_1..}, where x_m - x0 lives
};

std::string_view krylov_candidate_name(KrylovCandidate c) noexcept;

struct KernelAngle {
  std::size_t m = 0;
  KrylovCandidate candidate = KrylovCandidate::SolutionSpace;
  WeightTag weight = WeightTag::Euclidean;
  /// Largest principal angle between ker Sigma_m and W * candidate, i.e.
  /// between range Sigma_m and the W-orthogonal complement of the candidate.
  double angle = 0.0;

  bool operator==(const KernelAngle&) const = default;
};

std::vector<KernelAngle> kernel_krylov_angles(const GaussianBelief& posterior,
                                              const SolverState& state, std::size_t m,
                                              const LinearProblem& problem,
                                              const WeightSet& weights);

/// One comparison row of the oracle study.
struct OracleRow {
  std::string comparison;  // exact_condition | mu_m | kernel_angle
  std::string weight;      // empty for exact_condition
  std::string basis;       // krylov candidate, empty for exact_condition
  std::size_t m = 0;
  BeliefDistance distance;
  double angle = 0.0;

  bool operator==(const OracleRow&) const = default;
};

struct OracleStudy {
  std::vector<OracleRow> rows;
  std::vector<std::pair<WeightTag, std::string>> skipped_weights;
  std::size_t iterations = 0;

  bool operator==(const OracleStudy&) const = default;
};

/// Runs the solver with full history and compares every intermediate belief
/// against exact conditioning, mu_m under each weight and basis, and the
/// kernel/Krylov angles.
OracleStudy run_oracle_study(const LinearProblem& problem, const PriorSpec& spec,
                             const TerminationPolicy& policy,
                             const std::vector<WeightTag>& weights);

}  // namespace bcglab
