#pragma once

// BayesCG on singular and rectangular systems, measured against the
// Moore-Penrose minimum-norm least-squares solution.

#include <cstdint>
#include <vector>

#include "bcglab/prior.hpp"
#include "bcglab/problem.hpp"
#include "bcglab/solver.hpp"

namespace bcglab {

/// A^+ b: the least-squares minimizer of smallest Euclidean norm.
Vector moore_penrose_solve(const Matrix& a, std::span<const double> b);

struct PinvStudyConfig {
  std::size_t rows = 0;  // c
  std::size_t cols = 0;  // d
  std::size_t rank = 1;
  PriorSpec prior;
  RhsKind rhs = RhsKind::Generic;
  std::size_t replications = 1;
  std::uint64_t rng_seed = 0;
  TerminationPolicy policy;

  void validate() const;

  bool operator==(const PinvStudyConfig&) const = default;
};

struct PinvIteration {
  std::size_t m = 0;
  double residual_norm = 0.0;
  double distance_to_pinv = 0.0;

  bool operator==(const PinvIteration&) const = default;
};

struct PinvReplication {
  std::size_t replication = 0;
  std::size_t iterations = 0;
  StopReason stop = StopReason::Exhausted;
  double distance_to_pinv = 0.0;       // ||x_final - A^+ b||
  double distance_to_weighted = 0.0;   // ||x_final - x_W||, x_W the Sigma0^{-1}-min-norm LS solution
  double residual_norm = 0.0;          // ||A x_final - b||
  double range_distance = 0.0;         // ||b - A A^+ b||
  double min_norm_gap = 0.0;           // ||x_final|| - ||A^+ b||
  double norm_euclidean = 0.0;
  double norm_prior_weighted = 0.0;    // sqrt(x^T Sigma0^{-1} x)
  double norm_a_seminorm = 0.0;        // ||A x||
  std::vector<PinvIteration> history;

  bool operator==(const PinvReplication&) const = default;
};

struct Summary {
  double mean = 0.0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;

  bool operator==(const Summary&) const = default;
};

Summary summarize(std::vector<double> values);

struct PinvStudyReport {
  std::vector<PinvReplication> replications;
  Summary iterations;
  Summary distance_to_pinv;
  Summary distance_to_weighted;
  Summary residual_norm;
  Summary min_norm_gap;

  bool operator==(const PinvStudyReport&) const = default;
};

/// Breakdown ends a replication and is recorded, not raised.
PinvStudyReport run_pinv_study(const PinvStudyConfig& config);

}  // namespace bcglab
