#include "bcglab/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "bcglab/errors.hpp"

namespace bcglab::stats {

double chi2_cdf(double x, std::size_t dof) {
  if (x <= 0.0) return dof == 0 && x == 0.0 ? 1.0 : 0.0;
  if (dof == 0) return 1.0;
  return boost::math::gamma_p(0.5 * static_cast<double>(dof), 0.5 * x);
}

double chi2_quantile(double p, std::size_t dof) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidConfig, "chi2_quantile: p must be in (0, 1)");
  if (dof == 0) return 0.0;
  return 2.0 * boost::math::gamma_p_inv(0.5 * static_cast<double>(dof), p);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) return 0.0;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double worst = 0.0;
  // Ties are stepped over as one jump of the empirical CDF.
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double f = cdf(sorted[i]);
    worst = std::max({worst, static_cast<double>(j) / n - f, f - static_cast<double>(i) / n});
    i = j;
  }
  return std::clamp(worst, 0.0, 1.0);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / static_cast<double>(x.size()) -
                                     static_cast<double>(j) / static_cast<double>(y.size())));
  }
  return worst;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace bcglab::stats
