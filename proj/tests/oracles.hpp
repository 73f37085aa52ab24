#pragma once

// Reference computations for the tests. Written directly against Eigen with
// textbook formulas, sharing no code with the library under test.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "bcglab/matrix.hpp"

namespace oracle {

inline Eigen::MatrixXd E(const bcglab::Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Eigen::VectorXd E(const bcglab::Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline bcglab::Matrix B(const Eigen::MatrixXd& m) {
  bcglab::Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline bcglab::Vector B(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Pseudo-inverse via complete orthogonal decomposition (not SVD).
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  return cod.pseudoInverse();
}

inline Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Closed-form Gaussian W2: |m1 - m2|^2 + tr S1 + tr S2 - 2 tr (S1^1/2 S2 S1^1/2)^1/2.
inline double w2(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1, const Eigen::VectorXd& m2,
                 const Eigen::MatrixXd& s2) {
  const Eigen::MatrixXd r = sqrtm_psd(s1);
  const Eigen::MatrixXd cross = sqrtm_psd(r * s2 * r);
  const double b = s1.trace() + s2.trace() - 2.0 * cross.trace();
  return std::sqrt((m1 - m2).squaredNorm() + std::max(b, 0.0));
}

struct Gauss {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Noise-free conditioning of N(m0, S0) on S^T A x = y.
inline Gauss condition(const Eigen::VectorXd& m0, const Eigen::MatrixXd& s0, const Eigen::MatrixXd& a,
                       const Eigen::MatrixXd& s, const Eigen::VectorXd& y) {
  if (s.cols() == 0) return {m0, s0};
  const Eigen::MatrixXd l = s.transpose() * a;  // observation operator
  const Eigen::MatrixXd g = l * s0 * l.transpose();
  const Eigen::MatrixXd k = s0 * l.transpose() * g.fullPivLu().inverse();
  return {m0 + k * (y - l * m0), s0 - k * l * s0};
}

// W-orthogonal projector onto span(V).
inline Eigen::MatrixXd projector(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w) {
  return v * (v.transpose() * w * v).fullPivLu().inverse() * v.transpose() * w;
}

// Textbook CG iterates x_0..x_k.
inline std::vector<Eigen::VectorXd> cg(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int k) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size()), r = b, p = r;
  std::vector<Eigen::VectorXd> out{x};
  for (int i = 0; i < k && r.norm() > 0; ++i) {
    const Eigen::VectorXd ap = a * p;
    const double alpha = r.squaredNorm() / p.dot(ap);
    x += alpha * p;
    const Eigen::VectorXd rn = r - alpha * ap;
    p = rn + (rn.squaredNorm() / r.squaredNorm()) * p;
    r = rn;
    out.push_back(x);
  }
  return out;
}

// Regularized lower incomplete gamma P(a, x) by its power series.
inline double gamma_p(double a, double x) {
  if (x <= 0) return 0.0;
  double term = 1.0 / a, sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * sum;
}

inline double chi2_cdf(double x, int k) { return gamma_p(0.5 * k, 0.5 * x); }

// KS distance by brute force: compare F against both one-sided limits of
// the empirical CDF at every sample.
inline double ks(std::vector<double> xs, double (*cdf)(double, int), int k) {
  double worst = 0.0;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) {
    double below = 0, at = 0;
    for (double y : xs) {
      below += y < x;
      at += y <= x;
    }
    const double f = cdf(x, k);
    worst = std::max({worst, std::abs(at / n - f), std::abs(below / n - f)});
  }
  return worst;
}

}  // namespace oracle
