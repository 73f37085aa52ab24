#include <algorithm>
#include <cmath>
#include <limits>

#include "bcglab/cli.hpp"
#include "bcglab/parallel.hpp"
#include "bcglab/rng.hpp"

namespace bcglab::cli {

namespace {

InvariantRow row(std::size_t p, std::size_t m, std::string_view prior, std::string name, double value,
                 double expected, double tol) {
  return {p, m, std::string(prior), std::move(name), value, expected, tol, std::abs(value - expected) <= tol};
}

void check_prior(std::vector<InvariantRow>& out, std::size_t p, const LinearProblem& problem,
                 const PriorSpec& spec) {
  const std::string_view label = prior_kind_name(spec.kind);
  const std::size_t d = problem.cols();
  const PriorModel prior = make_prior(spec, problem);
  const GaussianBelief prior_belief = prior.belief();

  TerminationPolicy policy;
  policy.residual_tol = std::numeric_limits<double>::min();
  policy.trace_tol = std::numeric_limits<double>::min();
  policy.max_iters = d;
  policy.breakdown_is_error = false;
  const SolverTrace trace = bayescg_solve(problem, prior, policy);

  std::optional<CgResult> cg;
  if (spec.kind == PriorKind::InverseA) cg = classical_cg_solve(problem, prior.mean(), 0.0, d);
  const double xnorm = std::max(norm2(*problem.truth), 1e-300);

  const double dd = static_cast<double>(d);
  for (const auto& it : trace.iterations) {
    const std::size_t m = it.m;
    const double dm = static_cast<double>(d - m);
    const auto belief = GaussianBelief::from_factor(it.mean, it.covariance_factor);

    out.push_back(row(p, m, label, "trace_identity", trace_diagnostic(belief, prior_belief), dm, 1e-6 * dd));
    out.push_back(row(p, m, label, "rank", static_cast<double>(numerical_rank(belief.covariance())), dm, 0.0));

    const auto exact = exact_condition(prior_belief, LinearObservations::from_state(trace.final_state, problem, m));
    const auto dist = compare_beliefs(belief, exact);
    out.push_back(row(p, m, label, "oracle_mean_gap", dist.mean_diff, 0.0, 1e-8));
    out.push_back(row(p, m, label, "oracle_cov_gap", dist.cov_frobenius_diff, 0.0, 1e-8));

    if (cg && m < cg->iterates.size())
      out.push_back(row(p, m, label, "cg_mean_gap", norm2(sub(it.mean, cg->iterates[m])) / xnorm, 0.0, 1e-6));

    if (m > 0) {
      // One-sided: the trace may not grow.
      const double growth = it.covariance_trace - trace.iterations[m - 1].covariance_trace;
      const double tol = 1e-12 * trace.prior_trace;
      out.push_back({p, m, std::string(label), "trace_nonincreasing", growth, 0.0, tol, growth <= tol});
    }
    if (m == d) {
      out.push_back(row(p, m, label, "d_step_error", norm2(sub(it.mean, *problem.truth)) / xnorm, 0.0, 1e-8));
      out.push_back(row(p, m, label, "d_step_trace_ratio", it.covariance_trace / trace.prior_trace, 0.0, 1e-10));
    }
  }
  if (trace.final_state.m != d)
    out.push_back(row(p, trace.final_state.m, label, "reached_d_steps", static_cast<double>(trace.final_state.m),
                      dd, 0.0));
}

}  // namespace

std::vector<InvariantRow> run_invariants(std::size_t d, std::size_t problems, std::uint64_t seed,
                                         double condition) {
  std::vector<std::vector<InvariantRow>> per(problems);
  parallel_for(problems, [&](std::size_t p) {
    const LinearProblem problem = random_spd_problem(d, derive_key(seed, "invariants.problem", p), condition);
    for (const PriorSpec& spec : {PriorSpec::identity(), PriorSpec::inverse_a(), PriorSpec::natural()})
      check_prior(per[p], p, problem, spec);
  });
  std::vector<InvariantRow> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace bcglab::cli
