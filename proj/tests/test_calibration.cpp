#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "bcglab/calibration.hpp"
#include "bcglab/rng.hpp"
#include "bcglab/stats.hpp"
#include "oracles.hpp"

using namespace bcglab;
using oracle::E;

namespace {

std::vector<double> chi2_draws(std::size_t n, int k, std::uint64_t seed) {
  RandomStream rs(seed, "chi2");
  std::vector<double> out(n);
  for (auto& x : out) {
    x = 0;
    for (int j = 0; j < k; ++j) {
      const double z = rs.normal();
      x += z * z;
    }
  }
  return out;
}

struct ThreadEnv {
  explicit ThreadEnv(const char* v) { setenv("BAYESCG_LAB_THREADS", v, 1); }
  ~ThreadEnv() { unsetenv("BAYESCG_LAB_THREADS"); }
};

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("z_statistic examples") {
  const auto b = GaussianBelief::from_factor({1, 2}, Matrix{{2, 0}, {1, 1}});
  CHECK(z_statistic(Vector{1, 2}, b) == 0.0);
  CHECK(z_statistic(Vector{2}, GaussianBelief::from_factor({1}, Matrix{{1}})) == doctest::Approx(1.0));
  CHECK(z_statistic(Vector{5}, GaussianBelief::from_factor({1}, Matrix{{2}})) == doctest::Approx(4.0));
  CHECK(z_statistic(Vector{3, 3}, GaussianBelief::dirac({1, 1})) == 0.0);
  CHECK_THROWS_AS(z_statistic(Vector{1, 2, 3}, b), Error);

  // Against the dense pseudo-inverse Mahalanobis form on a rank-deficient belief.
  RandomStream rs(2, "z");
  const Matrix f = rs.normal_matrix(6, 3);
  const auto g = GaussianBelief::from_factor(rs.normal_vector(6), f);
  const Vector x = rs.normal_vector(6);
  const Eigen::VectorXd e = E(x) - E(g.mean);
  const double ref = e.dot(oracle::pinv(E(g.covariance())) * e);
  CHECK(z_statistic(x, g) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("chi-squared CDF and quantiles") {
  for (int k = 1; k <= 30; ++k)
    for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 25.0, 60.0}) {
      CAPTURE(k);
      CAPTURE(x);
      CHECK(std::abs(stats::chi2_cdf(x, k) - oracle::chi2_cdf(x, k)) <= 1e-12);
    }
  CHECK(stats::chi2_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-12));
  CHECK(stats::chi2_quantile(0.95, 15) == doctest::Approx(24.99579013972863).epsilon(1e-12));
  CHECK(stats::chi2_quantile(0.5, 2) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  for (std::size_t k : {1u, 4u, 15u})
    for (double p : {0.01, 0.5, 0.8, 0.999})
      CHECK(stats::chi2_cdf(stats::chi2_quantile(p, k), k) == doctest::Approx(p).epsilon(1e-12));
  CHECK(stats::chi2_cdf(0.0, 0) == 1.0);
  CHECK(stats::chi2_cdf(-1.0, 0) == 0.0);
  CHECK(stats::chi2_cdf(-1.0, 3) == 0.0);
  CHECK(stats::chi2_quantile(0.7, 0) == 0.0);
  CHECK_THROWS_AS(stats::chi2_quantile(0.0, 3), Error);
  CHECK_THROWS_AS(stats::chi2_quantile(1.0, 3), Error);
}

TEST_CASE("KS statistic agrees with the brute-force oracle, with and without ties") {
  for (int k : {1, 5, 15}) {
    auto xs = chi2_draws(300, k, k);
    auto cdf = [k](double x) { return stats::chi2_cdf(x, k); };
    CHECK(stats::ks_statistic(xs, cdf) == doctest::Approx(oracle::ks(xs, oracle::chi2_cdf, k)).epsilon(1e-12));
    for (auto& x : xs) x = std::round(x);
    CHECK(stats::ks_statistic(xs, cdf) == doctest::Approx(oracle::ks(xs, oracle::chi2_cdf, k)).epsilon(1e-12));
  }
  const std::vector<double> one{stats::chi2_quantile(0.5, 3)};
  CHECK(stats::ks_statistic(one, [](double x) { return stats::chi2_cdf(x, 3); }) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two-sample KS and mean") {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4}, c{10, 11};
  CHECK(stats::ks_two_sample(a, a) == 0.0);
  CHECK(stats::ks_two_sample(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(stats::ks_two_sample(a, c) == 1.0);
  CHECK(stats::mean(a) == 2.0);
}

TEST_CASE("config validation and scenarios") {
  CalibrationConfig c;
  c.m = 21;
  CHECK_THROWS_AS(run_calibration(c), Error);
  for (auto s : {CalibrationScenario::WellSpecified, CalibrationScenario::OverDispersed,
                 CalibrationScenario::UnderDispersed, CalibrationScenario::WrongMean,
                 CalibrationScenario::WrongCorrelation})
    CHECK(parse_scenario(scenario_name(s)) == s);
  CHECK_FALSE(parse_scenario("nope").has_value());
  const auto w = scenario_config(CalibrationScenario::WellSpecified, 8, 2, 10, 1);
  CHECK(w.generating_prior == w.solver_prior);
  const auto o = scenario_config(CalibrationScenario::OverDispersed, 8, 2, 10, 1);
  CHECK(frobenius_norm(sub(o.solver_prior.covariance, scaled(o.generating_prior.covariance, 100.0))) <=
        1e-12 * frobenius_norm(o.solver_prior.covariance));
}

TEST_CASE("m = d: every Z is 0 and the belief is a Dirac") {
  const auto cfg = scenario_config(CalibrationScenario::WellSpecified, 6, 6, 50, 3);
  const CalibrationReport r = run_calibration(cfg);
  CHECK(r.reference_dof == 0);
  for (double z : r.z_samples) CHECK(z == 0.0);
  CHECK(r.ks_statistic == 0.0);
  for (const auto& c : r.credible_coverage) CHECK(c.rate == 1.0);
}

TEST_CASE("over-dispersed prior covers above nominal, under-dispersed below") {
  const CalibrationReport over = run_calibration(scenario_config(CalibrationScenario::OverDispersed, 20, 5, 400, 1));
  const CalibrationReport under = run_calibration(scenario_config(CalibrationScenario::UnderDispersed, 20, 5, 400, 1));
  REQUIRE(over.credible_coverage.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(over.credible_coverage[i].rate > over.credible_coverage[i].level);
    CHECK(under.credible_coverage[i].rate < under.credible_coverage[i].level);
    if (i > 0) CHECK(over.credible_coverage[i].rate >= over.credible_coverage[i - 1].rate);
  }
}

TEST_CASE("data-independent directions recover the chi-squared law") {
  auto cfg = scenario_config(CalibrationScenario::WellSpecified, 20, 5, 500, 11);
  cfg.directions = DirectionSource::DataIndependent;
  const CalibrationReport r = run_calibration(cfg);
  CHECK(std::abs(r.z_mean - 15.0) <= 3.0 * r.z_standard_error);
  CHECK(r.z_standard_error == doctest::Approx(std::sqrt(2.0 * 15 / 500)));
  CHECK(r.ks_statistic <= 0.08);
}

TEST_CASE("adaptive directions make the well-specified belief conservative") {
  // Residual-seeded directions depend on x*, so Z sits well below d - m.
  const CalibrationReport r = run_calibration(scenario_config(CalibrationScenario::WellSpecified, 20, 5, 300, 2));
  CHECK(r.z_mean < 15.0 - 3.0 * r.z_standard_error);
  for (const auto& c : r.credible_coverage) CHECK(c.rate >= c.level);
  CHECK(r.bayesian_accuracy.mean_diff <= 1e-8);
  CHECK(r.bayesian_accuracy.cov_frobenius_diff <= 1e-8);
}

TEST_CASE("the trace-bound constant lies between the mean and largest prior eigenvalue") {
  const auto cfg = scenario_config(CalibrationScenario::WrongCorrelation, 12, 6, 40, 5);
  const CalibrationReport r = run_calibration(cfg);
  const Matrix& s0 = cfg.solver_prior.covariance;
  const auto eig = symmetric_eigen(s0);
  CHECK(r.c_sigma0_estimate >= trace(s0) / 12.0 - 1e-12);
  CHECK(r.c_sigma0_estimate <= eig.values.back() * (1 + 1e-10));
  CHECK(r.rows.size() == 40 * 7);
  for (const auto& row : r.rows) CHECK(row.dof == 12 - row.iteration);
}

TEST_CASE("Z is invariant to direction normalization and square-root choice") {
  auto cfg = scenario_config(CalibrationScenario::WrongMean, 15, 4, 200, 6);
  const CalibrationReport base = run_calibration(cfg);
  cfg.normalize_directions = false;
  const CalibrationReport raw = run_calibration(cfg);
  cfg.normalize_directions = true;
  cfg.solver_prior.factor = FactorKind::SymmetricSqrt;
  const CalibrationReport sq = run_calibration(cfg);
  for (std::size_t i = 0; i < base.z_samples.size(); ++i) {
    CHECK(raw.z_samples[i] == doctest::Approx(base.z_samples[i]).epsilon(1e-8));
    CHECK(sq.z_samples[i] == doctest::Approx(base.z_samples[i]).epsilon(1e-8));
  }
  CHECK(stats::ks_two_sample(base.z_samples, sq.z_samples) <= 0.05);
}

TEST_CASE("Bayesian accuracy: analytic gap zero, empirical gap shrinks like N^-1/2") {
  auto cfg = scenario_config(CalibrationScenario::WellSpecified, 10, 3, 1, 4);
  const BayesianAccuracyReport r = bayesian_accuracy_study(cfg, {1000, 10000}, 8);
  CHECK(r.analytic.mean_diff <= 1e-8);
  CHECK(r.analytic.cov_frobenius_diff <= 1e-8);
  CHECK(r.analytic.w2 <= 1e-6);
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[1].max_coordinate_gap <= 5.0 / std::sqrt(10000.0));
  CHECK(r.mean_gap_slope == doctest::Approx(-0.5).epsilon(0.4));
  CHECK(r.cov_gap_slope == doctest::Approx(-0.5).epsilon(0.4));

  cfg.m = 0;
  const BayesianAccuracyReport prior = bayesian_accuracy_study(cfg, {100}, 2);
  CHECK(prior.analytic == BeliefDistance{});
}

TEST_CASE("cost study operation counts") {
  const CostReport r = cost_factor_study(200, PriorSpec::user(Matrix::identity(200)), 2, 1, 20);
  CHECK(r.iterations == 20);
  CHECK(r.dense.trials.size() == 2);
  CHECK(r.dense.op_ratio > 2.5);
  CHECK(r.dense.op_ratio <= 4.0);
  CHECK(r.sparse.op_ratio < r.dense.op_ratio);
  CHECK(r.sparse.cg_flops == r.dense.cg_flops);
  for (const auto& t : r.dense.trials) CHECK(t.wall_ratio > 0.0);
}

TEST_CASE("reports do not depend on the worker count") {
  const auto cfg = scenario_config(CalibrationScenario::WellSpecified, 10, 4, 64, 9);
  CalibrationReport one, many;
  {
    ThreadEnv env("1");
    one = run_calibration(cfg);
  }
  {
    ThreadEnv env("4");
    many = run_calibration(cfg);
  }
  CHECK(one == many);
}

}
