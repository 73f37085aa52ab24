#include "bcglab/problem.hpp"

#include <cmath>

#include "bcglab/errors.hpp"
#include "bcglab/rng.hpp"
#include "eigen_bridge.hpp"

namespace bcglab {

void LinearProblem::validate() const {
  if (b.size() != a.rows())
    throw Error(ErrorKind::DimensionMismatch, "right-hand side length does not match A rows");
  if (truth && truth->size() != a.cols())
    throw Error(ErrorKind::DimensionMismatch, "truth length does not match A cols");
  if (!all_finite(a.data()) || !all_finite(b))
    throw Error(ErrorKind::NonFinite, "problem contains non-finite entries");
}

Matrix random_orthogonal(std::size_t n, std::uint64_t seed, std::string_view label) {
  RandomStream stream(seed, label);
  const Matrix g = stream.normal_matrix(n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(detail::as_eigen(g));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return detail::from_eigen(q);
}

namespace {

Vector log_spaced(std::size_t n, double lo, double hi) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    v[i] = lo * std::pow(hi / lo, t);
  }
  return v;
}

Matrix scale_columns(Matrix q, std::span<const double> s) {
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < q.cols(); ++j) q(i, j) *= s[j];
  return q;
}

}  // namespace

Matrix random_spd_matrix(std::size_t d, std::uint64_t seed, double condition) {
  const Matrix q = random_orthogonal(d, seed, "spd.basis");
  const Vector lambda = log_spaced(d, 1.0, condition);
  return symmetrized(matmul_nt(scale_columns(q, lambda), q));
}

LinearProblem random_spd_problem(std::size_t d, std::uint64_t seed, double condition) {
  LinearProblem p;
  p.a = random_spd_matrix(d, seed, condition);
  RandomStream stream(seed, "spd.truth");
  p.truth = stream.normal_vector(d);
  p.b = matvec(p.a, *p.truth);
  return p;
}

LinearProblem random_nonsymmetric_problem(std::size_t d, std::uint64_t seed, double condition) {
  const Matrix u = random_orthogonal(d, seed, "nonsym.left");
  const Matrix v = random_orthogonal(d, seed, "nonsym.right");
  const Vector sigma = log_spaced(d, 1.0, condition);
  LinearProblem p;
  p.a = matmul_nt(scale_columns(u, sigma), v);
  RandomStream stream(seed, "nonsym.truth");
  p.truth = stream.normal_vector(d);
  p.b = matvec(p.a, *p.truth);
  return p;
}

Matrix random_rank_matrix(std::size_t c, std::size_t d, std::size_t rank, std::uint64_t seed) {
  RandomStream stream(seed, "rank.factors");
  const Matrix g1 = stream.normal_matrix(c, rank);
  const Matrix g2 = stream.normal_matrix(d, rank);
  return matmul_nt(g1, g2);
}

LinearProblem random_rank_problem(std::size_t c, std::size_t d, std::size_t rank,
                                  std::uint64_t seed, RhsKind rhs) {
  LinearProblem p;
  p.a = random_rank_matrix(c, d, rank, seed);
  RandomStream stream(seed, "rank.rhs");
  if (rhs == RhsKind::InRange) {
    p.b = matvec(p.a, stream.normal_vector(d));
  } else {
    p.b = stream.normal_vector(c);
  }
  return p;
}

}  // namespace bcglab
