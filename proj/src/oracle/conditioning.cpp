#include <algorithm>
#include <cmath>
#include <numbers>

#include "../core/eigen_bridge.hpp"
#include "bcglab/errors.hpp"
#include "bcglab/oracle.hpp"

namespace bcglab {

LinearObservations LinearObservations::from_state(const SolverState& state,
                                                  const LinearProblem& problem, std::size_t m) {
  if (m > state.search_directions.size())
    throw Error(ErrorKind::DimensionMismatch, "from_state: fewer directions than requested");
  LinearObservations obs;
  obs.op = problem.a;
  for (std::size_t i = 0; i < m; ++i) {
    obs.directions.push_back(state.search_directions[i]);
    obs.values.push_back(dot(state.search_directions[i], problem.b));
  }
  return obs;
}

namespace {

/// Solves M X = R for symmetric positive (semi)definite M: Cholesky first,
/// pivoted LDL^T when a pivot fails.
Matrix solve_gram(const Matrix& gram, const Matrix& rhs) {
  try {
    const Matrix l = cholesky_factor(gram);
    Matrix x(rhs.rows(), rhs.cols());
    for (std::size_t j = 0; j < rhs.cols(); ++j) {
      const Vector col = cholesky_solve(l, rhs.column(j));
      for (std::size_t i = 0; i < rhs.rows(); ++i) x(i, j) = col[i];
    }
    return x;
  } catch (const Error&) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(detail::as_eigen(gram));
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorKind::DegenerateObservations, "observation Gram matrix factorization failed");
    return detail::from_eigen(ldlt.solve(Eigen::MatrixXd(detail::as_eigen(rhs))));
  }
}

Matrix leading_eigen_factor(const Matrix& cov, std::size_t keep) {
  const std::size_t d = cov.rows();
  keep = std::min(keep, d);
  const auto eig = symmetric_eigen(cov);
  Matrix f(d, keep);
  for (std::size_t j = 0; j < keep; ++j) {
    const std::size_t src = d - 1 - j;  // descending
    const double root = std::sqrt(std::max(eig.values[src], 0.0));
    for (std::size_t i = 0; i < d; ++i) f(i, j) = eig.vectors(i, src) * root;
  }
  return f;
}

}  // namespace

GaussianBelief exact_condition(const GaussianBelief& prior, const LinearObservations& obs) {
  const std::size_t m = obs.directions.size();
  if (obs.values.size() != m)
    throw Error(ErrorKind::DimensionMismatch, "observation values and directions differ in count");
  if (m == 0) return prior;
  const std::size_t d = prior.dim();
  if (obs.op.cols() != d) throw Error(ErrorKind::DimensionMismatch, "operator columns != prior dim");

  const Matrix s = Matrix::from_columns(obs.directions, obs.op.rows());
  const Matrix b = matmul_tn(obs.op, s);                          // A^T S, d x m
  const Matrix u = matmul_tn(prior.covariance_factor, b);         // F0^T A^T S
  const Matrix c = matmul(prior.covariance_factor, u);            // Sigma0 A^T S
  const Matrix gram = symmetrized(matmul_tn(u, u));               // S^T A Sigma0 A^T S
  if (numerical_rank(gram, 1e2 * default_rank_cutoff(gram)) < m)
    throw Error(ErrorKind::DegenerateObservations, "observations are linearly dependent under the prior");

  Matrix innovation(m, 1);
  const Vector predicted = matvec_t(b, prior.mean);
  for (std::size_t i = 0; i < m; ++i) innovation(i, 0) = obs.values[i] - predicted[i];

  const Matrix z = solve_gram(gram, innovation);
  Vector mean = prior.mean;
  axpy(1.0, matvec(c, z.column(0)), mean);

  const Matrix k = solve_gram(gram, transpose(c));  // m x d
  const Matrix cov = symmetrized(sub(prior.covariance(), matmul(c, k)));
  const std::size_t rank = prior.rank_hint > m ? prior.rank_hint - m : 0;
  if (rank == 0) return GaussianBelief::dirac(std::move(mean));
  GaussianBelief out = GaussianBelief::from_factor(std::move(mean), leading_eigen_factor(cov, rank));
  out.rank_hint = rank;
  return out;
}

GaussianBelief build_mu_m(const GaussianBelief& prior, std::span<const double> truth,
                          std::span<const Vector> krylov_basis, const InnerProductWeight& w) {
  const std::size_t d = prior.dim();
  if (truth.size() != d || w.dim() != d)
    throw Error(ErrorKind::DimensionMismatch, "build_mu_m: dimension mismatch");
  if (krylov_basis.empty()) return prior;
  const Matrix p = weighted_projection(krylov_basis, w);
  if (krylov_basis.size() == d) return GaussianBelief::dirac(Vector(truth.begin(), truth.end()));

  Vector mean = matvec(p, truth);
  axpy(1.0, prior.mean, mean);
  axpy(-1.0, matvec(p, prior.mean), mean);
  const Matrix complement = sub(Matrix::identity(d), p);
  // (I - P) F0 is a factor of (I - P) Sigma0 (I - P)^T, symmetric by construction.
  GaussianBelief out =
      GaussianBelief::from_factor(std::move(mean), matmul(complement, prior.covariance_factor));
  out.rank_hint = std::min(prior.rank_hint, d - krylov_basis.size());
  return out;
}

BeliefDistance compare_beliefs(const GaussianBelief& a, const GaussianBelief& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "compare_beliefs: dimension mismatch");
  BeliefDistance out;
  out.mean_diff = norm2(sub(a.mean, b.mean));
  out.cov_frobenius_diff =
      a.covariance_factor == b.covariance_factor ? 0.0 : frobenius_norm(sub(a.covariance(), b.covariance()));
  out.w2 = gaussian_w2_distance(a, b);
  return out;
}

namespace {

void try_weight(WeightSet& set, WeightTag tag, const Matrix& m) {
  try {
    set.weights.emplace_back(tag, m);
  } catch (const Error& e) {
    set.skipped.emplace_back(tag, e.what());
  }
}

}  // namespace

WeightSet standard_weights(const LinearProblem& problem, const PriorModel& prior) {
  WeightSet set;
  const std::size_t d = problem.cols();
  set.weights.push_back(InnerProductWeight::euclidean(d));
  if (problem.is_square()) {
    try_weight(set, WeightTag::AWeighted, problem.a);
  } else {
    set.skipped.emplace_back(WeightTag::AWeighted, "A is not square");
  }
  try_weight(set, WeightTag::Sigma0Weighted, prior.precision());
  if (problem.is_square()) {
    const Matrix g = symmetrized(matmul_nt(matmul(problem.a, prior.covariance()), problem.a));
    try_weight(set, WeightTag::ASigma0AtWeighted, g);
  } else {
    set.skipped.emplace_back(WeightTag::ASigma0AtWeighted, "A Sigma0 A^T does not act on R^d");
  }
  return set;
}

std::string_view krylov_candidate_name(KrylovCandidate c) noexcept {
  return c == KrylovCandidate::SearchSpace ? "search" : "solution";
}

std::vector<KernelAngle> kernel_krylov_angles(const GaussianBelief& posterior,
                                              const SolverState& state, std::size_t m,
                                              const LinearProblem& problem,
                                              const WeightSet& weights) {
  const std::size_t d = posterior.dim();
  std::vector<KrylovCandidate> candidates{KrylovCandidate::SolutionSpace};
  if (problem.is_square()) candidates.push_back(KrylovCandidate::SearchSpace);

  Matrix kernel(d, 0);
  if (m > 0) {
    const auto eig = symmetric_eigen(posterior.covariance());
    kernel = leading_columns(eig.vectors, m);  // eigenvalues ascending
  }

  std::vector<KernelAngle> out;
  for (KrylovCandidate cand : candidates) {
    const auto& vectors =
        cand == KrylovCandidate::SolutionSpace ? state.krylov_basis : state.search_directions;
    const Matrix basis = Matrix::from_columns(std::span(vectors).first(m), d);
    for (const auto& w : weights.weights) {
      KernelAngle row{m, cand, w.tag(), 0.0};
      if (m > 0) {
        const Matrix image = orthonormal_basis(matmul(w.matrix(), basis));
        row.angle = image.cols() == m ? largest_principal_angle(kernel, image)
                                      : std::numbers::pi / 2.0;
      }
      out.push_back(row);
    }
  }
  return out;
}

OracleStudy run_oracle_study(const LinearProblem& problem, const PriorSpec& spec,
                             const TerminationPolicy& policy,
                             const std::vector<WeightTag>& wanted) {
  const PriorModel prior = make_prior(spec, problem);
  TerminationPolicy p = policy;
  p.breakdown_is_error = false;
  const SolverTrace trace = bayescg_solve(problem, prior, p);

  WeightSet all = standard_weights(problem, prior);
  WeightSet weights;
  weights.skipped = all.skipped;
  for (auto& w : all.weights)
    if (std::find(wanted.begin(), wanted.end(), w.tag()) != wanted.end()) weights.weights.push_back(w);

  const Vector truth = problem.truth ? *problem.truth : matvec(pseudo_inverse(problem.a), problem.b);
  const GaussianBelief prior_belief = prior.belief();
  const auto& state = trace.final_state;
  const std::size_t d = problem.cols();

  OracleStudy study;
  study.iterations = state.m;
  study.skipped_weights = weights.skipped;
  for (std::size_t m = 0; m <= state.m; ++m) {
    const auto& rec = trace.iterations[m];
    GaussianBelief belief = GaussianBelief::from_factor(rec.mean, rec.covariance_factor);

    const GaussianBelief exact =
        exact_condition(prior_belief, LinearObservations::from_state(state, problem, m));
    study.rows.push_back({"exact_condition", "", "", m, compare_beliefs(belief, exact), 0.0});

    std::vector<KrylovCandidate> candidates{KrylovCandidate::SolutionSpace};
    if (problem.is_square()) candidates.push_back(KrylovCandidate::SearchSpace);
    for (KrylovCandidate cand : candidates) {
      const auto& vectors =
          cand == KrylovCandidate::SolutionSpace ? state.krylov_basis : state.search_directions;
      const std::span<const Vector> basis = std::span(vectors).first(m);
      for (const auto& w : weights.weights) {
        OracleRow row{"mu_m", std::string(weight_tag_name(w.tag())),
                      std::string(krylov_candidate_name(cand)), m, {}, 0.0};
        try {
          row.distance = compare_beliefs(belief, build_mu_m(prior_belief, truth, basis, w));
        } catch (const Error&) {
          row.comparison = "mu_m_degenerate";
        }
        study.rows.push_back(row);
      }
    }
    if (d <= 400) {
      for (const auto& a : kernel_krylov_angles(belief, state, m, problem, weights)) {
        study.rows.push_back({"kernel_angle", std::string(weight_tag_name(a.weight)),
                              std::string(krylov_candidate_name(a.candidate)), m, {}, a.angle});
      }
    }
  }
  return study;
}

}  // namespace bcglab
