#pragma once

// BayesCG: a conjugate-gradient recursion that carries a Gaussian belief
// N(x_m, Sigma_m) about the solution, plus classical CG as the baseline the
// mean is compared against.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "bcglab/errors.hpp"
#include "bcglab/gaussian.hpp"
#include "bcglab/prior.hpp"
#include "bcglab/problem.hpp"

namespace bcglab {

/// Multiply-add counts for machine-independent cost comparisons.
struct OpCounter {
  std::uint64_t matvecs = 0;
  std::uint64_t prior_applies = 0;
  std::uint64_t flops = 0;

  bool operator==(const OpCounter&) const = default;
};

struct TerminationPolicy {
  double residual_tol = 1e-10;  // ||r_m|| / ||b||
  double trace_tol = 1e-12;     // trace(Sigma_m) / trace(Sigma_0)
  std::size_t max_iters = 0;    // 0 means min(rows, cols)
  /// Breakdown throws BreakdownError when set; otherwise it ends the run
  /// with StopReason::Breakdown.
  bool breakdown_is_error = true;

  bool operator==(const TerminationPolicy&) const = default;
};

enum class Recurrence {
  FullReorthogonalization,  // conjugate against every previous direction, twice
  TwoTerm,                  // classical recurrence against the last direction only
};

enum class CovarianceTracking {
  Explicit,  // maintain a d x (d - m) factor of Sigma_m
  Implicit,  // keep only Sigma0 A^T s_i; Sigma_m = Sigma0 - sum w_i w_i^T
};

struct SolverOptions {
  Recurrence recurrence = Recurrence::FullReorthogonalization;
  bool normalize_directions = true;
  bool recompute_residual = true;  // r = b - A x each step instead of the recurrence
  CovarianceTracking covariance = CovarianceTracking::Explicit;
  bool record_history = true;
  bool diagnostics = true;  // conjugacy monitoring

  bool operator==(const SolverOptions&) const = default;
};

struct SolverState {
  std::size_t m = 0;
  GaussianBelief belief;  // factor empty under implicit tracking
  std::vector<Vector> search_directions;   // s_i in R^rows
  std::vector<Vector> conjugate_images;    // A Sigma0 A^T s_i
  std::vector<Vector> krylov_basis;        // Sigma0 A^T s_i in R^cols
  std::vector<double> conjugacy_scalars;   // s_i^T A Sigma0 A^T s_i
  Vector residual;
  double covariance_trace = 0.0;
  double gram_norm_estimate = 0.0;  // running lower bound on ||A Sigma0 A^T||
  double max_conjugacy_defect = 0.0;
  double last_step_length = 0.0;
  double last_raw_conjugacy = 0.0;

  bool operator==(const SolverState&) const = default;
};

enum class StopReason { ResidualTolerance, TraceTolerance, MaxIterations, Exhausted, Breakdown };

std::string_view stop_reason_name(StopReason r) noexcept;

struct IterationRecord {
  std::size_t m = 0;
  Vector mean;
  Matrix covariance_factor;  // empty under implicit tracking
  double residual_norm = 0.0;
  double covariance_trace = 0.0;
  double conjugacy_scalar = 0.0;  // raw s^T A Sigma0 A^T s before normalization
  double step_length = 0.0;
  double max_conjugacy_defect = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

struct SolverTrace {
  std::vector<IterationRecord> iterations;  // index 0 is the prior
  SolverState final_state;
  StopReason stop = StopReason::Exhausted;
  double prior_trace = 0.0;
  double rhs_norm = 0.0;
  OpCounter ops;

  bool operator==(const SolverTrace&) const = default;
};

class BreakdownError : public Error {
 public:
  BreakdownError(const std::string& what, SolverTrace partial)
      : Error(ErrorKind::Breakdown, what), trace_(std::move(partial)) {}
  const SolverTrace& trace() const noexcept { return trace_; }

 private:
  SolverTrace trace_;
};

/// Thrown by bayescg_step; bayescg_solve converts it per its policy.
class StepBreakdown : public Error {
 public:
  explicit StepBreakdown(const std::string& what) : Error(ErrorKind::Breakdown, what) {}
};

SolverState initial_state(const LinearProblem& problem, const PriorModel& prior,
                          const SolverOptions& options, OpCounter* ops = nullptr);

/// One BayesCG step. The new direction is seeded by the current residual,
/// or by `candidate` when given, and conjugated in the A Sigma0 A^T inner
/// product. Throws StepBreakdown when its A Sigma0 A^T norm is numerically
/// zero.
SolverState bayescg_step(const SolverState& state, const LinearProblem& problem,
                         const PriorModel& prior, const SolverOptions& options = {},
                         OpCounter* ops = nullptr,
                         std::optional<std::span<const double>> candidate = std::nullopt);

SolverTrace bayescg_solve(const LinearProblem& problem, const PriorModel& prior,
                          const TerminationPolicy& policy = {},
                          const SolverOptions& options = {});

SolverTrace bayescg_solve(const LinearProblem& problem, const PriorSpec& spec,
                          const TerminationPolicy& policy = {},
                          const SolverOptions& options = {});

struct CgResult {
  std::vector<Vector> iterates;  // x_0, x_1, ...
  std::vector<double> residual_norms;
  OpCounter ops;

  bool operator==(const CgResult&) const = default;
};

/// Classical CG on symmetric positive definite A. Stops when
/// ||r|| <= tol ||b|| or after max_iters (0 means d) steps.
CgResult classical_cg_solve(const LinearProblem& problem, std::span<const double> x0, double tol,
                            std::size_t max_iters = 0, bool record_iterates = true);

/// trace(Sigma_m Sigma0^{-1}); SingularPrior when Sigma0 is not invertible.
double trace_diagnostic(const GaussianBelief& current, const GaussianBelief& prior);

}  // namespace bcglab
