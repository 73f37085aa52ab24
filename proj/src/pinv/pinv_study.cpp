#include "bcglab/pinv_study.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcglab/errors.hpp"
#include "bcglab/parallel.hpp"
#include "bcglab/rng.hpp"

namespace bcglab {

Vector moore_penrose_solve(const Matrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw Error(ErrorKind::DimensionMismatch, "moore_penrose_solve: size mismatch");
  return matvec(pseudo_inverse(a), b);
}

void PinvStudyConfig::validate() const {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::InvalidConfig, "pinv study: empty shape");
  if (rank < 1 || rank > std::min(rows, cols))
    throw Error(ErrorKind::InvalidConfig, "pinv study: rank must be in [1, min(c, d)]");
  if (replications < 1) throw Error(ErrorKind::InvalidConfig, "pinv study: replications must be >= 1");
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.q10 = quantile(0.1);
  s.q50 = quantile(0.5);
  s.q90 = quantile(0.9);
  return s;
}

namespace {

PinvReplication run_replication(const PinvStudyConfig& config, std::size_t index) {
  const std::uint64_t seed = derive_key(config.rng_seed, "pinv.replication", index);
  const LinearProblem problem =
      random_rank_problem(config.rows, config.cols, config.rank, seed, config.rhs);
  const PriorModel prior = make_prior(config.prior, problem);
  TerminationPolicy policy = config.policy;
  policy.breakdown_is_error = false;
  const SolverTrace trace = bayescg_solve(problem, prior, policy);

  const Vector target = moore_penrose_solve(problem.a, problem.b);
  // x0 + Sigma0 A^T (A Sigma0 A^T)^+ (b - A x0), the limit in the prior's
  // geometry, evaluated as x0 + F (A F)^+ (b - A x0) with Sigma0 = F F^T.
  const Matrix& f = prior.factor();
  Vector weighted = prior.mean();
  axpy(1.0,
       matvec(f, matvec(pseudo_inverse(matmul(problem.a, f)),
                        sub(problem.b, matvec(problem.a, prior.mean())))),
       weighted);

  PinvReplication rep;
  rep.replication = index;
  rep.iterations = trace.final_state.m;
  rep.stop = trace.stop;
  for (const auto& it : trace.iterations) {
    rep.history.push_back({it.m, it.residual_norm, norm2(sub(it.mean, target))});
  }
  const Vector& x = trace.final_state.belief.mean;
  rep.distance_to_pinv = norm2(sub(x, target));
  rep.distance_to_weighted = norm2(sub(x, weighted));
  rep.residual_norm = norm2(sub(matvec(problem.a, x), problem.b));
  rep.range_distance = norm2(sub(problem.b, matvec(problem.a, target)));
  rep.norm_euclidean = norm2(x);
  rep.min_norm_gap = rep.norm_euclidean - norm2(target);
  rep.norm_prior_weighted = std::sqrt(std::max(0.0, dot(x, matvec(prior.precision(), x))));
  rep.norm_a_seminorm = norm2(matvec(problem.a, x));
  return rep;
}

}  // namespace

PinvStudyReport run_pinv_study(const PinvStudyConfig& config) {
  config.validate();
  PinvStudyReport report;
  report.replications.resize(config.replications);
  parallel_for(config.replications, [&](std::size_t i) {
    try {
      report.replications[i] = run_replication(config, i);
    } catch (const Error& e) {
      throw Error(e.kind(), "replication " + std::to_string(i) + ": " + e.what());
    }
  });

  std::vector<double> iters, dist, wdist, resid, gap;
  for (const auto& r : report.replications) {
    iters.push_back(static_cast<double>(r.iterations));
    dist.push_back(r.distance_to_pinv);
    wdist.push_back(r.distance_to_weighted);
    resid.push_back(r.residual_norm);
    gap.push_back(r.min_norm_gap);
  }
  report.iterations = summarize(iters);
  report.distance_to_pinv = summarize(dist);
  report.distance_to_weighted = summarize(wdist);
  report.residual_norm = summarize(resid);
  report.min_norm_gap = summarize(gap);
  return report;
}

}  // namespace bcglab
