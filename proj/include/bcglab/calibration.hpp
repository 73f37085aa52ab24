#pragma once

// Uncertainty-calibration harness: frequentist coverage through the Z
// statistic, Bayesian accuracy by sampling the exact posterior, and the
// BayesCG-vs-CG cost study.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcglab/oracle.hpp"
#include "bcglab/prior.hpp"
#include "bcglab/solver.hpp"

namespace bcglab {

/// Z = (x* - x_m)^T Sigma_m^+ (x* - x_m), evaluated as ||F^+ (x* - x_m)||^2
/// for the covariance factor F. Chi-squared with rank(Sigma_m) degrees of
/// freedom when x* really is drawn from the belief.
double z_statistic(std::span<const double> truth, const GaussianBelief& belief);

enum class DirectionSource {
  Adaptive,         // the residual-seeded BayesCG directions of this replication
  DataIndependent,  // directions BayesCG produces for an independent replicate x'
};

std::string_view direction_source_name(DirectionSource s) noexcept;

enum class CalibrationScenario {
  WellSpecified,
  OverDispersed,     // solver covariance 100x the generating covariance
  UnderDispersed,    // solver covariance 0.01x
  WrongMean,         // solver mean shifted by 2 in every coordinate
  WrongCorrelation,  // solver keeps only the generating variances
};

std::string_view scenario_name(CalibrationScenario s) noexcept;
std::optional<CalibrationScenario> parse_scenario(std::string_view name) noexcept;

struct CalibrationConfig {
  std::size_t d = 20;
  std::size_t m = 5;
  PriorSpec generating_prior;
  PriorSpec solver_prior;
  std::size_t replications = 2000;
  std::uint64_t rng_seed = 0;
  double condition = 10.0;  // of the fixed random SPD operator
  DirectionSource directions = DirectionSource::Adaptive;
  bool normalize_directions = true;
  bool measure_runtime = false;
  std::vector<double> levels{0.5, 0.8, 0.9, 0.95};

  void validate() const;

  bool operator==(const CalibrationConfig&) const = default;
};

/// Generating covariance has eigenvalues log-spaced in [0.5, 2] in a random
/// basis; the solver prior follows the scenario.
CalibrationConfig scenario_config(CalibrationScenario scenario, std::size_t d, std::size_t m,
                                  std::size_t replications, std::uint64_t seed);

struct CoverageLevel {
  double level = 0.0;
  double rate = 0.0;

  bool operator==(const CoverageLevel&) const = default;
};

struct CalibrationRow {
  std::size_t replication = 0;
  std::size_t iteration = 0;
  std::size_t dof = 0;
  double z = 0.0;
  double covariance_trace = 0.0;

  bool operator==(const CalibrationRow&) const = default;
};

struct CalibrationReport {
  std::vector<double> z_samples;
  std::size_t reference_dof = 0;
  double z_mean = 0.0;
  double z_standard_error = 0.0;  // sqrt(2 dof / N)
  double ks_statistic = 0.0;
  std::vector<CoverageLevel> credible_coverage;
  BeliefDistance bayesian_accuracy;  // replication 0: solver belief vs exact conditioning
  double c_sigma0_estimate = 0.0;    // max over k, replications of trace(Sigma_k) / (d - k)
  std::optional<double> runtime_ratio;
  std::vector<CalibrationRow> rows;

  bool operator==(const CalibrationReport&) const = default;
};

/// Per replication: x* from the generating prior, b = A x*, m solver steps
/// under the solver prior, Z recorded at every step.
CalibrationReport run_calibration(const CalibrationConfig& config);

struct AccuracyPoint {
  std::size_t samples = 0;
  double mean_gap = 0.0;            // ||empirical mean - analytic mean||, averaged
  double max_coordinate_gap = 0.0;  // max over coordinates and repetitions
  double cov_gap = 0.0;             // Frobenius, averaged
  double w2 = 0.0;                  // averaged

  bool operator==(const AccuracyPoint&) const = default;
};

struct BayesianAccuracyReport {
  BeliefDistance analytic;  // solver belief vs exact posterior
  std::vector<AccuracyPoint> points;
  double mean_gap_slope = 0.0;  // d log(gap) / d log(N) between first and last point
  double cov_gap_slope = 0.0;

  bool operator==(const BayesianAccuracyReport&) const = default;
};

BayesianAccuracyReport bayesian_accuracy_study(const CalibrationConfig& config,
                                               const std::vector<std::size_t>& sample_sizes,
                                               std::size_t repetitions = 16);

struct CostTrial {
  std::size_t trial = 0;
  double bayescg_seconds = 0.0;
  double cg_seconds = 0.0;
  double wall_ratio = 0.0;

  bool operator==(const CostTrial&) const = default;
};

struct CostArm {
  std::string prior;
  std::uint64_t bayescg_flops = 0;
  std::uint64_t cg_flops = 0;
  double op_ratio = 0.0;
  double median_wall_ratio = 0.0;
  std::vector<CostTrial> trials;

  bool operator==(const CostArm&) const = default;
};

struct CostReport {
  std::size_t d = 0;
  std::size_t iterations = 0;
  CostArm dense;
  CostArm sparse;

  bool operator==(const CostReport&) const = default;
};

/// BayesCG cost relative to CG at equal iteration counts. BayesCG runs in
/// its lean configuration (two-term recurrence, recurrence residual,
/// implicit covariance) once with the dense prior and once with the
/// SparseDiagonal prior holding the same diagonal.
CostReport cost_factor_study(std::size_t d, const PriorSpec& dense_prior, std::size_t trials,
                             std::uint64_t seed, std::size_t iterations = 50);

}  // namespace bcglab
