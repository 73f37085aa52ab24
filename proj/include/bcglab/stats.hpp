#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace bcglab::stats {

/// Chi-squared CDF via the regularized lower incomplete gamma function.
/// Zero degrees of freedom is the point mass at 0.
double chi2_cdf(double x, std::size_t dof);
double chi2_quantile(double p, std::size_t dof);

/// sup |F_n(x) - F(x)| for the empirical CDF of samples.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// sup |F_a(x) - F_b(x)| between two empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);

}  // namespace bcglab::stats
