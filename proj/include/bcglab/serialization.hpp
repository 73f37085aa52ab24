#pragma once

// JSON mappings for every config and report type. Doubles go through
// nlohmann's shortest round-trip formatting, so parse(dump(x)) == x.

#include <json.hpp>
#include <optional>

#include "bcglab/calibration.hpp"
#include "bcglab/oracle.hpp"
#include "bcglab/pinv_study.hpp"
#include "bcglab/prior.hpp"
#include "bcglab/solver.hpp"

NLOHMANN_JSON_NAMESPACE_BEGIN
template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& v) {
    if (v) j = *v;
    else j = nullptr;
  }
  static void from_json(const json& j, std::optional<T>& v) {
    if (j.is_null()) v.reset();
    else v = j.get<T>();
  }
};
NLOHMANN_JSON_NAMESPACE_END

namespace bcglab {

using nlohmann::json;

/// {"format": "bcglab-matrix", "rows", "cols", "symmetric", "order": "row-major", "data"}
void to_json(json& j, const Matrix& m);
void from_json(const json& j, Matrix& m);

NLOHMANN_JSON_SERIALIZE_ENUM(PriorKind, {{PriorKind::Identity, "identity"},
                                         {PriorKind::UserCovariance, "user"},
                                         {PriorKind::InverseA, "inverse-a"},
                                         {PriorKind::NaturalPrecision, "natural"},
                                         {PriorKind::SparseDiagonal, "sparse-diag"}})
NLOHMANN_JSON_SERIALIZE_ENUM(FactorKind, {{FactorKind::Cholesky, "cholesky"},
                                          {FactorKind::SymmetricSqrt, "symmetric-sqrt"}})
NLOHMANN_JSON_SERIALIZE_ENUM(StopReason, {{StopReason::ResidualTolerance, "residual"},
                                          {StopReason::TraceTolerance, "trace"},
                                          {StopReason::MaxIterations, "max-iters"},
                                          {StopReason::Exhausted, "exhausted"},
                                          {StopReason::Breakdown, "breakdown"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Recurrence, {{Recurrence::FullReorthogonalization, "full"},
                                          {Recurrence::TwoTerm, "two-term"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CovarianceTracking, {{CovarianceTracking::Explicit, "explicit"},
                                                  {CovarianceTracking::Implicit, "implicit"}})
NLOHMANN_JSON_SERIALIZE_ENUM(WeightTag, {{WeightTag::Euclidean, "euclid"},
                                         {WeightTag::AWeighted, "a"},
                                         {WeightTag::Sigma0Weighted, "sigma0"},
                                         {WeightTag::ASigma0AtWeighted, "asigma0at"}})
NLOHMANN_JSON_SERIALIZE_ENUM(RhsKind, {{RhsKind::InRange, "in-range"}, {RhsKind::Generic, "generic"}})
NLOHMANN_JSON_SERIALIZE_ENUM(DirectionSource, {{DirectionSource::Adaptive, "adaptive"},
                                               {DirectionSource::DataIndependent, "data-independent"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GaussianBelief, mean, covariance_factor, rank_hint)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LinearProblem, a, b, truth)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PriorSpec, kind, covariance, diagonal, mean, factor)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OpCounter, matvecs, prior_applies, flops)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TerminationPolicy, residual_tol, trace_tol, max_iters,
                                   breakdown_is_error)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SolverOptions, recurrence, normalize_directions, recompute_residual,
                                   covariance, record_history, diagnostics)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SolverState, m, belief, search_directions, conjugate_images,
                                   krylov_basis, conjugacy_scalars, residual, covariance_trace,
                                   gram_norm_estimate, max_conjugacy_defect, last_step_length,
                                   last_raw_conjugacy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(IterationRecord, m, mean, covariance_factor, residual_norm,
                                   covariance_trace, conjugacy_scalar, step_length,
                                   max_conjugacy_defect)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SolverTrace, iterations, final_state, stop, prior_trace, rhs_norm, ops)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BeliefDistance, mean_diff, cov_frobenius_diff, w2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OracleRow, comparison, weight, basis, m, distance, angle)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OracleStudy, rows, skipped_weights, iterations)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PinvStudyConfig, rows, cols, rank, prior, rhs, replications,
                                   rng_seed, policy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PinvIteration, m, residual_norm, distance_to_pinv)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PinvReplication, replication, iterations, stop, distance_to_pinv,
                                   distance_to_weighted, residual_norm, range_distance, min_norm_gap,
                                   norm_euclidean, norm_prior_weighted, norm_a_seminorm, history)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Summary, mean, q10, q50, q90)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PinvStudyReport, replications, iterations, distance_to_pinv,
                                   distance_to_weighted, residual_norm, min_norm_gap)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CalibrationConfig, d, m, generating_prior, solver_prior,
                                   replications, rng_seed, condition, directions,
                                   normalize_directions, measure_runtime, levels)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CoverageLevel, level, rate)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CalibrationRow, replication, iteration, dof, z, covariance_trace)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CalibrationReport, z_samples, reference_dof, z_mean,
                                   z_standard_error, ks_statistic, credible_coverage,
                                   bayesian_accuracy, c_sigma0_estimate, runtime_ratio, rows)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AccuracyPoint, samples, mean_gap, max_coordinate_gap, cov_gap, w2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BayesianAccuracyReport, analytic, points, mean_gap_slope,
                                   cov_gap_slope)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CostTrial, trial, bayescg_seconds, cg_seconds, wall_ratio)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CostArm, prior, bayescg_flops, cg_flops, op_ratio,
                                   median_wall_ratio, trials)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CostReport, d, iterations, dense, sparse)

}  // namespace bcglab
