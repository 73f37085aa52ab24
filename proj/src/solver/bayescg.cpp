#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bcglab/rng.hpp"
#include "bcglab/solver.hpp"

namespace bcglab {

std::string_view stop_reason_name(StopReason r) noexcept {
  switch (r) {
    case StopReason::ResidualTolerance: return "residual";
    case StopReason::TraceTolerance: return "trace";
    case StopReason::MaxIterations: return "max-iters";
    case StopReason::Exhausted: return "exhausted";
    case StopReason::Breakdown: return "breakdown";
  }
  return "unknown";
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxReorthPasses = 5;

struct Counter {
  OpCounter* ops;
  void matvec(const Matrix& a) const {
    if (!ops) return;
    ++ops->matvecs;
    ops->flops += static_cast<std::uint64_t>(a.rows()) * a.cols();
  }
  void prior(const PriorModel& p) const {
    if (!ops) return;
    ++ops->prior_applies;
    ops->flops += p.apply_cost();
  }
  void vec(std::size_t n, std::uint64_t times = 1) const {
    if (ops) ops->flops += times * static_cast<std::uint64_t>(n);
  }
};

void scale_in_place(Vector& v, double s) {
  for (double& x : v) x *= s;
}

/// A Sigma0 A^T applied to s, keeping the intermediate images.
struct GramImages {
  Vector at_s;      // A^T s
  Vector sigma_at;  // Sigma0 A^T s
  Vector gram;      // A Sigma0 A^T s
};

GramImages gram_images(const LinearProblem& problem, const PriorModel& prior,
                       std::span<const double> s, const Counter& count) {
  GramImages g;
  g.at_s = matvec_t(problem.a, s);
  count.matvec(problem.a);
  g.sigma_at = prior.apply(g.at_s);
  count.prior(prior);
  g.gram = matvec(problem.a, g.sigma_at);
  count.matvec(problem.a);
  return g;
}

/// Removes the unit direction u from the factor's column space:
/// F (I - u u^T) F^T = (F H)(F H)^T with the last column of F H dropped,
/// H the Householder reflector mapping u to a multiple of e_k.
Matrix downdate_factor(const Matrix& f, Vector u, const Counter& count) {
  const std::size_t k = f.cols();
  const double nu = norm2(u);
  if (k == 0 || nu == 0.0) return f;
  scale_in_place(u, 1.0 / nu);
  Vector h = std::move(u);
  const double sign = h[k - 1] >= 0.0 ? 1.0 : -1.0;
  h[k - 1] += sign;
  const double hh = dot(h, h);
  const Vector t = matvec(f, h);
  Matrix out(f.rows(), k - 1);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    const double coef = -2.0 * t[i] / hh;
    const auto src = f.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j + 1 < k; ++j) dst[j] = src[j] + coef * h[j];
  }
  count.vec(f.rows() * k, 3);
  return out;
}

}  // namespace

SolverState initial_state(const LinearProblem& problem, const PriorModel& prior,
                          const SolverOptions& options, OpCounter* ops) {
  problem.validate();
  if (prior.dim() != problem.cols())
    throw Error(ErrorKind::DimensionMismatch, "prior dimension does not match problem columns");
  const Counter count{ops};
  SolverState s;
  s.belief.mean = prior.mean();
  if (options.covariance == CovarianceTracking::Explicit) {
    s.belief.covariance_factor = prior.factor();
    s.belief.rank_hint = std::min(prior.factor().rows(), prior.factor().cols());
  }
  s.covariance_trace = prior.covariance_trace();
  s.residual = sub(problem.b, matvec(problem.a, s.belief.mean));
  count.matvec(problem.a);

  // Seeds the breakdown threshold with one Rayleigh quotient of a fixed probe.
  RandomStream probe_stream(0, "gram-probe");
  const Vector probe = probe_stream.normal_vector(problem.rows());
  const GramImages g = gram_images(problem, prior, probe, count);
  s.gram_norm_estimate = std::max(0.0, dot(probe, g.gram) / dot(probe, probe));
  return s;
}

SolverState bayescg_step(const SolverState& state, const LinearProblem& problem,
                         const PriorModel& prior, const SolverOptions& options, OpCounter* ops,
                         std::optional<std::span<const double>> candidate) {
  const std::size_t c = problem.rows();
  const std::size_t d = problem.cols();
  if (state.m >= std::min(c, d))
    throw Error(ErrorKind::InvalidConfig, "bayescg_step: all directions already used");
  const Counter count{ops};

  Vector s = candidate ? Vector(candidate->begin(), candidate->end()) : state.residual;
  if (s.size() != c) throw Error(ErrorKind::DimensionMismatch, "candidate direction size");

  const std::size_t m = state.m;
  if (options.recurrence == Recurrence::FullReorthogonalization) {
    // Two passes, more while a pass still cancels most of the vector.
    double before = norm2(s);
    for (int pass = 0; pass < kMaxReorthPasses && m > 0; ++pass) {
      for (std::size_t i = 0; i < m; ++i) {
        const double coef = dot(state.conjugate_images[i], s) / state.conjugacy_scalars[i];
        axpy(-coef, state.search_directions[i], s);
      }
      count.vec(c, 2 * m + 1);
      const double after = norm2(s);
      if (pass >= 1 && !(after < 0.5 * before)) break;
      before = after;
    }
  } else if (m > 0) {
    const double coef = dot(state.conjugate_images[m - 1], s) / state.conjugacy_scalars[m - 1];
    axpy(-coef, state.search_directions[m - 1], s);
    count.vec(c, 2);
  }

  const double s_norm2 = dot(s, s);
  count.vec(c);
  GramImages g = gram_images(problem, prior, s, count);
  double lambda = dot(s, g.gram);
  count.vec(c);
  const double threshold =
      static_cast<double>(c) * kEps * std::max(state.gram_norm_estimate, 0.0) * s_norm2;
  if (!(s_norm2 > 0.0) || !(lambda > threshold) || !std::isfinite(lambda)) {
    throw StepBreakdown("breakdown at step " + std::to_string(m + 1) +
                        ": direction has numerically zero A Sigma0 A^T norm");
  }

  SolverState next = state;
  next.gram_norm_estimate = std::max(state.gram_norm_estimate, lambda / s_norm2);
  const double raw_lambda = lambda;
  if (options.normalize_directions) {
    const double f = 1.0 / std::sqrt(lambda);
    scale_in_place(s, f);
    scale_in_place(g.at_s, f);
    scale_in_place(g.sigma_at, f);
    scale_in_place(g.gram, f);
    count.vec(2 * c + 2 * d);
    lambda = 1.0;
  }

  const double alpha = dot(s, state.residual) / lambda;
  count.vec(c);
  axpy(alpha, g.sigma_at, next.belief.mean);
  count.vec(d);
  if (options.recompute_residual) {
    next.residual = sub(problem.b, matvec(problem.a, next.belief.mean));
    count.matvec(problem.a);
  } else {
    axpy(-alpha, g.gram, next.residual);
    count.vec(c);
  }

  if (options.covariance == CovarianceTracking::Explicit) {
    const Matrix& f = state.belief.covariance_factor;
    if (f.cols() > 0) {
      Vector u = matvec_t(f, g.at_s);
      count.vec(f.rows() * f.cols());
      next.belief.covariance_factor = downdate_factor(f, std::move(u), count);
    }
    next.belief.rank_hint = next.belief.covariance_factor.cols();
    next.covariance_trace = std::pow(frobenius_norm(next.belief.covariance_factor), 2);
  } else {
    next.covariance_trace =
        std::max(0.0, state.covariance_trace - dot(g.sigma_at, g.sigma_at) / lambda);
    count.vec(d);
  }

  if (options.diagnostics) {
    double worst = state.max_conjugacy_defect;
    for (std::size_t i = 0; i < m; ++i) {
      const double off = std::abs(dot(state.conjugate_images[i], s)) /
                         std::sqrt(state.conjugacy_scalars[i] * lambda);
      worst = std::max(worst, off);
    }
    count.vec(c, m);
    next.max_conjugacy_defect = worst;
  }

  next.search_directions.push_back(std::move(s));
  next.conjugate_images.push_back(std::move(g.gram));
  next.krylov_basis.push_back(std::move(g.sigma_at));
  next.conjugacy_scalars.push_back(lambda);
  next.m = m + 1;
  next.last_step_length = alpha;
  next.last_raw_conjugacy = raw_lambda;
  return next;
}

namespace {

IterationRecord make_record(const SolverState& s, bool keep_belief) {
  IterationRecord r;
  r.m = s.m;
  if (keep_belief) {
    r.mean = s.belief.mean;
    r.covariance_factor = s.belief.covariance_factor;
  }
  r.residual_norm = norm2(s.residual);
  r.covariance_trace = s.covariance_trace;
  r.conjugacy_scalar = s.last_raw_conjugacy;
  r.step_length = s.last_step_length;
  r.max_conjugacy_defect = s.max_conjugacy_defect;
  return r;
}

}  // namespace

SolverTrace bayescg_solve(const LinearProblem& problem, const PriorModel& prior,
                          const TerminationPolicy& policy, const SolverOptions& options) {
  if (!(policy.residual_tol > 0.0) || !(policy.trace_tol > 0.0))
    throw Error(ErrorKind::InvalidConfig, "termination tolerances must be positive");
  SolverTrace trace;
  SolverState state = initial_state(problem, prior, options, &trace.ops);
  trace.prior_trace = prior.covariance_trace();
  trace.rhs_norm = norm2(problem.b);
  trace.iterations.push_back(make_record(state, options.record_history));

  std::size_t limit = std::min(problem.rows(), problem.cols());
  if (policy.max_iters > 0) limit = std::min(limit, policy.max_iters);

  for (;;) {
    const double rnorm = trace.iterations.back().residual_norm;
    if (rnorm <= policy.residual_tol * trace.rhs_norm) {
      trace.stop = StopReason::ResidualTolerance;
      break;
    }
    if (trace.prior_trace > 0.0 &&
        state.covariance_trace <= policy.trace_tol * trace.prior_trace) {
      trace.stop = StopReason::TraceTolerance;
      break;
    }
    if (state.m >= std::min(problem.rows(), problem.cols())) {
      trace.stop = StopReason::Exhausted;
      break;
    }
    if (state.m >= limit) {
      trace.stop = StopReason::MaxIterations;
      break;
    }
    try {
      state = bayescg_step(state, problem, prior, options, &trace.ops);
      trace.iterations.push_back(make_record(state, options.record_history));
    } catch (const StepBreakdown& e) {
      trace.stop = StopReason::Breakdown;
      trace.final_state = state;
      if (!options.record_history) {
        trace.iterations.back().mean = state.belief.mean;
        trace.iterations.back().covariance_factor = state.belief.covariance_factor;
      }
      if (policy.breakdown_is_error) throw BreakdownError(e.what(), std::move(trace));
      return trace;
    }
  }
  if (!options.record_history) {
    trace.iterations.back().mean = state.belief.mean;
    trace.iterations.back().covariance_factor = state.belief.covariance_factor;
  }
  trace.final_state = std::move(state);
  return trace;
}

SolverTrace bayescg_solve(const LinearProblem& problem, const PriorSpec& spec,
                          const TerminationPolicy& policy, const SolverOptions& options) {
  const bool with_factor = options.covariance == CovarianceTracking::Explicit;
  return bayescg_solve(problem, make_prior(spec, problem, with_factor), policy, options);
}

CgResult classical_cg_solve(const LinearProblem& problem, std::span<const double> x0, double tol,
                            std::size_t max_iters, bool record_iterates) {
  problem.validate();
  const Matrix& a = problem.a;
  if (!a.is_square() || asymmetry(a) > kDefaultPsdRelativeTol * max_abs(a))
    throw Error(ErrorKind::NonSymmetric, "classical CG requires a symmetric matrix");
  const std::size_t d = a.rows();
  if (x0.size() != d) throw Error(ErrorKind::DimensionMismatch, "x0 dimension mismatch");
  if (max_iters == 0) max_iters = d;

  CgResult out;
  const Counter count{&out.ops};
  Vector x(x0.begin(), x0.end());
  Vector r = sub(problem.b, matvec(a, x));
  count.matvec(a);
  Vector p = r;
  double rr = dot(r, r);
  count.vec(d);
  const double bnorm = norm2(problem.b);
  out.iterates.push_back(x);
  out.residual_norms.push_back(std::sqrt(rr));

  for (std::size_t k = 0; k < max_iters; ++k) {
    if (std::sqrt(rr) <= tol * bnorm) break;
    const Vector ap = matvec(a, p);
    count.matvec(a);
    const double pap = dot(p, ap);
    count.vec(d);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < d; ++i) p[i] = r[i] + beta * p[i];
    count.vec(d, 4);
    rr = rr_next;
    if (record_iterates) {
      out.iterates.push_back(x);
    } else {
      out.iterates.back() = x;
    }
    out.residual_norms.push_back(std::sqrt(rr));
  }
  return out;
}

double trace_diagnostic(const GaussianBelief& current, const GaussianBelief& prior) {
  if (current.dim() != prior.dim())
    throw Error(ErrorKind::DimensionMismatch, "trace_diagnostic: dimension mismatch");
  if (current.covariance_factor.rows() != current.dim())
    throw Error(ErrorKind::InvalidConfig, "trace_diagnostic needs an explicit covariance factor");
  Matrix l;
  try {
    l = cholesky_factor(symmetrized(prior.covariance()));
  } catch (const Error& e) {
    throw Error(ErrorKind::SingularPrior, std::string("prior covariance not invertible: ") + e.what());
  }
  const Matrix x = solve_lower(l, current.covariance_factor);
  const double f = frobenius_norm(x);
  return f * f;
}

}  // namespace bcglab
