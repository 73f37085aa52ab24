#include "bcglab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bcglab/errors.hpp"
#include "bcglab/kernels.hpp"
#include "bcglab/rng.hpp"
#include "eigen_bridge.hpp"

namespace bcglab {

using detail::as_eigen;
using detail::from_eigen;

GaussianBelief GaussianBelief::dirac(Vector mean) {
  const std::size_t d = mean.size();
  return {std::move(mean), Matrix(d, 0), 0};
}

GaussianBelief GaussianBelief::from_factor(Vector mean, Matrix factor) {
  if (factor.rows() != mean.size())
    throw Error(ErrorKind::DimensionMismatch, "covariance factor rows must equal mean dimension");
  const std::size_t r = std::min(factor.rows(), factor.cols());
  return {std::move(mean), std::move(factor), r};
}

Matrix GaussianBelief::covariance() const {
  return matmul_nt(covariance_factor, covariance_factor);
}

double GaussianBelief::covariance_trace() const {
  const double f = frobenius_norm(covariance_factor);
  return f * f;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (!m.is_square()) throw Error(ErrorKind::DimensionMismatch, "symmetric_eigen: not square");
  if (!all_finite(m.data())) throw Error(ErrorKind::NonFinite, "symmetric_eigen: non-finite entry");
  if (m.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as_eigen(m));
  SymmetricEigen out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  out.vectors = from_eigen(es.eigenvectors());
  return out;
}

Matrix sym_psd_sqrt(const Matrix& m, double tol) {
  if (!m.is_square()) throw Error(ErrorKind::DimensionMismatch, "sym_psd_sqrt: not square");
  if (tol < 0.0) tol = kDefaultPsdRelativeTol * max_abs(m);
  if (asymmetry(m) > tol)
    throw Error(ErrorKind::NonSymmetric, "sym_psd_sqrt: matrix is not symmetric");
  const auto eig = symmetric_eigen(symmetrized(m));
  const std::size_t n = m.rows();
  Matrix scaled_vectors(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double lambda = eig.values[j];
    if (lambda < -tol)
      throw Error(ErrorKind::IndefiniteMatrix,
                  "sym_psd_sqrt: eigenvalue " + std::to_string(lambda) + " below -tol");
    const double root = std::sqrt(std::max(lambda, 0.0));
    for (std::size_t i = 0; i < n; ++i) scaled_vectors(i, j) = eig.vectors(i, j) * root;
  }
  // V sqrt(L) V^T, written as (V sqrt(L)) V^T and symmetrized.
  return symmetrized(matmul_nt(scaled_vectors, eig.vectors));
}

Matrix cholesky_factor(const Matrix& m) {
  if (!m.is_square()) throw Error(ErrorKind::DimensionMismatch, "cholesky_factor: not square");
  if (!all_finite(m.data())) throw Error(ErrorKind::NonFinite, "cholesky_factor: non-finite entry");
  if (asymmetry(m) > kDefaultPsdRelativeTol * max_abs(m))
    throw Error(ErrorKind::NonSymmetric, "cholesky_factor: matrix is not symmetric");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  const auto& k = kernels::active();
  for (std::size_t j = 0; j < n; ++j) {
    const double pivot = m(j, j) - k.dot(l.row(j).data(), l.row(j).data(), j);
    if (!(pivot > 0.0))
      throw Error(ErrorKind::NotPositiveDefinite,
                  "cholesky_factor: non-positive pivot at column " + std::to_string(j));
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i)
      l(i, j) = (m(i, j) - k.dot(l.row(i).data(), l.row(j).data(), j)) / ljj;
  }
  return l;
}

Vector solve_lower(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw Error(ErrorKind::DimensionMismatch, "solve_lower: size mismatch");
  Vector x(n);
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < n; ++i)
    x[i] = (b[i] - k.dot(l.row(i).data(), x.data(), i)) / l(i, i);
  return x;
}

Vector solve_lower_transposed(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  if (b.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "solve_lower_transposed: size mismatch");
  // Column-oriented back substitution on L^T: x_i is final once rows below
  // have been eliminated, and row i of L holds column i of L^T.
  Vector x(b.begin(), b.end());
  const auto& k = kernels::active();
  for (std::size_t i = n; i-- > 0;) {
    x[i] /= l(i, i);
    if (i > 0) k.axpy(-x[i], l.row(i).data(), x.data(), i);
  }
  return x;
}

Matrix solve_lower(const Matrix& l, const Matrix& b) {
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vector col = solve_lower(l, b.column(j));
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
  }
  return x;
}

Matrix solve_lower_transposed(const Matrix& l, const Matrix& b) {
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vector col = solve_lower_transposed(l, b.column(j));
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
  }
  return x;
}

Vector cholesky_solve(const Matrix& l, std::span<const double> b) {
  return solve_lower_transposed(l, solve_lower(l, b));
}

double default_rank_cutoff(const Matrix& m) noexcept {
  return static_cast<double>(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon();
}

namespace {

struct Svd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};

Svd thin_svd(const Matrix& m) {
  if (!all_finite(m.data())) throw Error(ErrorKind::NonFinite, "svd: non-finite entry");
  // Eigen 3.4.0's BDCSVD loses accuracy on clustered singular values
  // (projector-like covariances); one-sided Jacobi after pivoted QR does not.
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      as_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

double resolve_cutoff(const Matrix& m, std::optional<double> cutoff) {
  return cutoff ? *cutoff : default_rank_cutoff(m);
}

}  // namespace

Vector singular_values(const Matrix& m) {
  if (!all_finite(m.data())) throw Error(ErrorKind::NonFinite, "svd: non-finite entry");
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(as_eigen(m));
  const auto& s = svd.singularValues();
  return Vector(s.data(), s.data() + s.size());
}

Matrix pseudo_inverse(const Matrix& m, std::optional<double> cutoff) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.cols(), m.rows());
  const Svd svd = thin_svd(m);
  const double smax = svd.s.size() ? svd.s(0) : 0.0;
  const double threshold = resolve_cutoff(m, cutoff) * smax;
  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(m.cols(), m.rows());
  for (Eigen::Index k = 0; k < svd.s.size(); ++k) {
    if (svd.s(k) <= threshold || svd.s(k) == 0.0) continue;
    pinv.noalias() += (svd.v.col(k) / svd.s(k)) * svd.u.col(k).transpose();
  }
  return from_eigen(pinv);
}

std::size_t numerical_rank(const Matrix& m, std::optional<double> cutoff) {
  const Vector s = singular_values(m);
  if (s.empty() || s.front() == 0.0) return 0;
  const double threshold = resolve_cutoff(m, cutoff) * s.front();
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [&](double v) { return v > threshold; }));
}

Matrix orthonormal_basis(const Matrix& m, std::optional<double> cutoff) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
  const Svd svd = thin_svd(m);
  const double smax = svd.s.size() ? svd.s(0) : 0.0;
  const double threshold = resolve_cutoff(m, cutoff) * smax;
  Eigen::Index keep = 0;
  while (keep < svd.s.size() && svd.s(keep) > threshold && svd.s(keep) > 0.0) ++keep;
  return from_eigen(svd.u.leftCols(keep));
}

double largest_principal_angle(const Matrix& q1, const Matrix& q2) {
  if (q1.rows() != q2.rows() || q1.cols() != q2.cols())
    throw Error(ErrorKind::DimensionMismatch, "principal angle: subspace dimensions differ");
  if (q1.cols() == 0) return 0.0;
  // sin(theta_max) = || (I - Q2 Q2^T) Q1 ||_2
  const Matrix residual = sub(q1, matmul(q2, matmul_tn(q2, q1)));
  const Vector s = singular_values(residual);
  const double sine = s.empty() ? 0.0 : std::min(1.0, s.front());
  return std::asin(sine);
}

Matrix compressed_factor(const Matrix& factor) {
  const std::size_t d = factor.rows();
  if (factor.cols() <= d) return factor;
  // F^T = Q R  =>  F F^T = R^T R, so R^T (d x d) is an equivalent factor.
  const Matrix ft = transpose(factor);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(as_eigen(ft));
  const Eigen::MatrixXd r = qr.matrixQR().topRows(static_cast<Eigen::Index>(d))
                                .triangularView<Eigen::Upper>();
  return from_eigen(r.transpose());
}

std::string_view weight_tag_name(WeightTag tag) noexcept {
  switch (tag) {
    case WeightTag::Euclidean: return "euclid";
    case WeightTag::AWeighted: return "a";
    case WeightTag::Sigma0Weighted: return "sigma0";
    case WeightTag::ASigma0AtWeighted: return "asigma0at";
  }
  return "unknown";
}

std::optional<WeightTag> parse_weight_tag(std::string_view name) noexcept {
  for (WeightTag t : {WeightTag::Euclidean, WeightTag::AWeighted, WeightTag::Sigma0Weighted,
                      WeightTag::ASigma0AtWeighted})
    if (weight_tag_name(t) == name) return t;
  return std::nullopt;
}

InnerProductWeight::InnerProductWeight(WeightTag tag, Matrix weight)
    : tag_(tag), weight_(std::move(weight)) {
  if (!weight_.is_square())
    throw Error(ErrorKind::InvalidWeight, "weight matrix must be square");
  if (asymmetry(weight_) > kDefaultPsdRelativeTol * max_abs(weight_))
    throw Error(ErrorKind::InvalidWeight,
                std::string("weight matrix for '") + std::string(weight_tag_name(tag)) +
                    "' is not symmetric");
  try {
    (void)cholesky_factor(symmetrized(weight_));
  } catch (const Error&) {
    throw Error(ErrorKind::InvalidWeight,
                std::string("weight matrix for '") + std::string(weight_tag_name(tag)) +
                    "' is not positive definite");
  }
}

InnerProductWeight InnerProductWeight::euclidean(std::size_t dim) {
  return {WeightTag::Euclidean, Matrix::identity(dim)};
}

Matrix weighted_projection(std::span<const Vector> basis, const InnerProductWeight& w) {
  const std::size_t d = w.dim();
  if (basis.empty()) return Matrix(d, d);
  const Matrix v = Matrix::from_columns(basis, d);
  const Matrix wv = matmul(w.matrix(), v);  // d x k
  const Matrix gram = symmetrized(matmul_tn(v, wv));
  if (numerical_rank(gram, 1e3 * default_rank_cutoff(gram)) < basis.size())
    throw Error(ErrorKind::DegenerateBasis, "weighted_projection: basis is linearly dependent");
  // A spanning basis projects onto the whole space.
  if (basis.size() == d) return Matrix::identity(d);
  Matrix l;
  try {
    l = cholesky_factor(gram);
  } catch (const Error&) {
    throw Error(ErrorKind::DegenerateBasis, "weighted_projection: Gram matrix not positive definite");
  }
  // P = V G^{-1} (W V)^T, with G^{-1} (W V)^T solved column by column.
  const Matrix wvt = transpose(wv);  // k x d
  Matrix coeff(basis.size(), d);
  for (std::size_t j = 0; j < d; ++j) {
    const Vector c = cholesky_solve(l, wvt.column(j));
    for (std::size_t i = 0; i < basis.size(); ++i) coeff(i, j) = c[i];
  }
  return matmul(v, coeff);
}

std::vector<Vector> sample_gaussian(const GaussianBelief& belief, std::uint64_t seed,
                                    std::size_t n) {
  RandomStream stream(seed, "sample_gaussian");
  const std::size_t r = belief.covariance_factor.cols();
  std::vector<Vector> draws;
  draws.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (r == 0) {
      draws.push_back(belief.mean);
      continue;
    }
    const Vector z = stream.normal_vector(r);
    Vector x = matvec(belief.covariance_factor, z);
    axpy(1.0, belief.mean, x);
    draws.push_back(std::move(x));
  }
  return draws;
}

namespace {

Matrix padded(const Matrix& f, std::size_t cols) {
  Matrix out(f.rows(), cols);
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t j = 0; j < f.cols(); ++j) out(i, j) = f(i, j);
  return out;
}

}  // namespace

double gaussian_w2_distance(const GaussianBelief& p, const GaussianBelief& q) {
  if (p.dim() != q.dim() || p.covariance_factor.rows() != q.covariance_factor.rows())
    throw Error(ErrorKind::DimensionMismatch, "gaussian_w2_distance: dimension mismatch");
  const double mean_sq = [&] {
    const double m = norm2(sub(p.mean, q.mean));
    return m * m;
  }();
  if (p.covariance_factor == q.covariance_factor) return std::sqrt(mean_sq);

  const Matrix fp0 = compressed_factor(p.covariance_factor);
  const Matrix fq0 = compressed_factor(q.covariance_factor);
  const std::size_t r = std::max(fp0.cols(), fq0.cols());
  double bures_sq = 0.0;
  if (r > 0) {
    const Matrix fp = padded(fp0, r);
    const Matrix fq = padded(fq0, r);
    // Orthogonal Procrustes: U = W V^T from the SVD of Fq^T Fp = W S V^T.
    const Matrix cross = matmul_tn(fq, fp);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_eigen(cross),
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix rotation = from_eigen(svd.matrixU() * svd.matrixV().transpose());
    const double b = frobenius_norm(sub(fp, matmul(fq, rotation)));
    bures_sq = b * b;
  }
  return std::sqrt(mean_sq + bures_sq);
}

}  // namespace bcglab
