#include "bcglab/prior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcglab/errors.hpp"

namespace bcglab {

std::string_view prior_kind_name(PriorKind kind) noexcept {
  switch (kind) {
    case PriorKind::Identity: return "identity";
    case PriorKind::UserCovariance: return "user";
    case PriorKind::InverseA: return "inverse-a";
    case PriorKind::NaturalPrecision: return "natural";
    case PriorKind::SparseDiagonal: return "sparse-diag";
  }
  return "unknown";
}

PriorSpec PriorSpec::user(Matrix covariance, FactorKind factor) {
  PriorSpec s;
  s.kind = PriorKind::UserCovariance;
  s.covariance = std::move(covariance);
  s.factor = factor;
  return s;
}

PriorSpec PriorSpec::sparse_diagonal(Vector diagonal) {
  PriorSpec s;
  s.kind = PriorKind::SparseDiagonal;
  s.diagonal = std::move(diagonal);
  return s;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidPrior, what); }

Matrix inverse_transpose_of_lower(const Matrix& l) {
  // L^{-T} by back substitution against the identity.
  return solve_lower_transposed(l, Matrix::identity(l.rows()));
}

Matrix checked_cholesky(const Matrix& m, const std::string& what) {
  try {
    return cholesky_factor(m);
  } catch (const Error& e) {
    invalid(what + ": " + e.what());
  }
}

}  // namespace

PriorModel make_prior(const PriorSpec& spec, const LinearProblem& problem, bool with_factor) {
  const std::size_t d = problem.cols();
  PriorModel p;
  p.kind_ = spec.kind;
  if (spec.mean) {
    if (spec.mean->size() != d) invalid("prior mean dimension does not match problem");
    p.mean_ = *spec.mean;
  } else {
    p.mean_.assign(d, 0.0);
  }

  switch (spec.kind) {
    case PriorKind::Identity:
      p.trace_ = static_cast<double>(d);
      if (with_factor) p.factor_ = Matrix::identity(d);
      break;

    case PriorKind::UserCovariance: {
      if (spec.covariance.rows() != d || spec.covariance.cols() != d)
        invalid("user covariance shape does not match problem");
      checked_cholesky(spec.covariance, "user covariance is not symmetric positive definite");
      p.dense_ = spec.covariance;
      p.trace_ = trace(spec.covariance);
      if (with_factor) {
        p.factor_ = spec.factor == FactorKind::Cholesky ? cholesky_factor(spec.covariance)
                                                        : sym_psd_sqrt(spec.covariance);
      }
      break;
    }

    case PriorKind::InverseA: {
      if (!problem.is_square()) invalid("inverse-a prior requires a square A");
      if (asymmetry(problem.a) > kDefaultPsdRelativeTol * max_abs(problem.a))
        invalid("inverse-a prior requires a symmetric A");
      p.chol_ = checked_cholesky(problem.a, "inverse-a prior requires a positive definite A");
      const Matrix linv_t = inverse_transpose_of_lower(p.chol_);
      p.trace_ = std::pow(frobenius_norm(linv_t), 2);
      if (with_factor) p.factor_ = linv_t;
      break;
    }

    case PriorKind::NaturalPrecision: {
      const Matrix precision = symmetrized(matmul_tn(problem.a, problem.a));
      p.chol_ = checked_cholesky(precision, "natural prior requires A^T A positive definite");
      const Matrix linv_t = inverse_transpose_of_lower(p.chol_);
      p.trace_ = std::pow(frobenius_norm(linv_t), 2);
      if (with_factor) p.factor_ = linv_t;
      break;
    }

    case PriorKind::SparseDiagonal: {
      if (spec.diagonal.size() != d) invalid("sparse diagonal length does not match problem");
      if (!std::all_of(spec.diagonal.begin(), spec.diagonal.end(),
                       [](double v) { return v > 0.0 && std::isfinite(v); }))
        invalid("sparse diagonal entries must be positive");
      p.diag_ = spec.diagonal;
      for (double v : p.diag_) p.trace_ += v;
      if (with_factor) {
        Vector roots(d);
        for (std::size_t i = 0; i < d; ++i) roots[i] = std::sqrt(p.diag_[i]);
        p.factor_ = Matrix::diagonal(roots);
      }
      break;
    }
  }
  return p;
}

Vector PriorModel::apply(std::span<const double> v) const {
  if (v.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "prior apply: size mismatch");
  switch (kind_) {
    case PriorKind::Identity:
      return Vector(v.begin(), v.end());
    case PriorKind::UserCovariance:
      return matvec(dense_, v);
    case PriorKind::InverseA:
    case PriorKind::NaturalPrecision:
      return cholesky_solve(chol_, v);
    case PriorKind::SparseDiagonal: {
      Vector out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = diag_[i] * v[i];
      return out;
    }
  }
  return {};
}

std::uint64_t PriorModel::apply_cost() const noexcept {
  const auto d = static_cast<std::uint64_t>(dim());
  switch (kind_) {
    case PriorKind::Identity: return 0;
    case PriorKind::UserCovariance: return d * d;
    case PriorKind::InverseA:
    case PriorKind::NaturalPrecision: return d * d;  // two triangular solves
    case PriorKind::SparseDiagonal: return d;
  }
  return 0;
}

const Matrix& PriorModel::factor() const {
  if (!factor_) throw Error(ErrorKind::InvalidPrior, "prior was built without a covariance factor");
  return *factor_;
}

GaussianBelief PriorModel::belief() const { return GaussianBelief::from_factor(mean_, factor()); }

Matrix PriorModel::covariance() const {
  switch (kind_) {
    case PriorKind::UserCovariance:
      return dense_;
    case PriorKind::SparseDiagonal:
      return Matrix::diagonal(diag_);
    case PriorKind::Identity:
      return Matrix::identity(dim());
    default:
      return symmetrized(matmul_nt(factor(), factor()));
  }
}

Matrix PriorModel::precision() const {
  switch (kind_) {
    case PriorKind::Identity:
      return Matrix::identity(dim());
    case PriorKind::SparseDiagonal: {
      Vector inv(diag_.size());
      for (std::size_t i = 0; i < diag_.size(); ++i) inv[i] = 1.0 / diag_[i];
      return Matrix::diagonal(inv);
    }
    case PriorKind::InverseA:
    case PriorKind::NaturalPrecision:
      return symmetrized(matmul_nt(chol_, chol_));
    case PriorKind::UserCovariance: {
      const Matrix l = cholesky_factor(dense_);
      const Matrix linv = solve_lower(l, Matrix::identity(dim()));
      return symmetrized(matmul_tn(linv, linv));
    }
  }
  return {};
}

double PriorModel::covariance_trace() const { return trace_; }

}  // namespace bcglab
