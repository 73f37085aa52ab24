#include "bcglab/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "bcglab/errors.hpp"
#include "bcglab/parallel.hpp"
#include "bcglab/rng.hpp"
#include "bcglab/stats.hpp"

namespace bcglab {

double z_statistic(std::span<const double> truth, const GaussianBelief& belief) {
  if (truth.size() != belief.dim())
    throw Error(ErrorKind::DimensionMismatch, "z_statistic: truth and belief dimensions differ");
  if (belief.is_dirac()) return 0.0;
  const Vector e = sub(truth, belief.mean);
  const Vector w = matvec(pseudo_inverse(belief.covariance_factor), e);
  return dot(w, w);
}

std::string_view direction_source_name(DirectionSource s) noexcept {
  return s == DirectionSource::Adaptive ? "adaptive" : "data-independent";
}

namespace {

constexpr std::pair<CalibrationScenario, std::string_view> kScenarioNames[] = {
    {CalibrationScenario::WellSpecified, "well-specified"},
    {CalibrationScenario::OverDispersed, "over-dispersed"},
    {CalibrationScenario::UnderDispersed, "under-dispersed"},
    {CalibrationScenario::WrongMean, "wrong-mean"},
    {CalibrationScenario::WrongCorrelation, "wrong-correlation"},
};

}  // namespace

std::string_view scenario_name(CalibrationScenario s) noexcept {
  for (auto [k, n] : kScenarioNames)
    if (k == s) return n;
  return "unknown";
}

std::optional<CalibrationScenario> parse_scenario(std::string_view name) noexcept {
  for (auto [k, n] : kScenarioNames)
    if (n == name) return k;
  return std::nullopt;
}

void CalibrationConfig::validate() const {
  if (d == 0) throw Error(ErrorKind::InvalidConfig, "calibration: d must be positive");
  if (m > d) throw Error(ErrorKind::InvalidConfig, "calibration: m must not exceed d");
  if (replications == 0) throw Error(ErrorKind::InvalidConfig, "calibration: replications must be positive");
  if (!(condition >= 1.0)) throw Error(ErrorKind::InvalidConfig, "calibration: condition must be >= 1");
  for (double p : levels)
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidConfig, "calibration: levels must lie in (0, 1)");
}

CalibrationConfig scenario_config(CalibrationScenario scenario, std::size_t d, std::size_t m,
                                  std::size_t replications, std::uint64_t seed) {
  CalibrationConfig c;
  c.d = d;
  c.m = m;
  c.replications = replications;
  c.rng_seed = seed;
  const Matrix cov = scaled(random_spd_matrix(d, derive_key(seed, "calibration.covariance"), 4.0), 0.5);
  c.generating_prior = PriorSpec::user(cov);
  switch (scenario) {
    case CalibrationScenario::WellSpecified:
      c.solver_prior = c.generating_prior;
      break;
    case CalibrationScenario::OverDispersed:
      c.solver_prior = PriorSpec::user(scaled(cov, 100.0));
      break;
    case CalibrationScenario::UnderDispersed:
      c.solver_prior = PriorSpec::user(scaled(cov, 0.01));
      break;
    case CalibrationScenario::WrongMean:
      c.solver_prior = c.generating_prior;
      c.solver_prior.mean = Vector(d, 2.0);
      break;
    case CalibrationScenario::WrongCorrelation: {
      Vector diag(d);
      for (std::size_t i = 0; i < d; ++i) diag[i] = cov(i, i);
      c.solver_prior = PriorSpec::user(Matrix::diagonal(diag));
      break;
    }
  }
  return c;
}

namespace {

struct Setup {
  LinearProblem problem;
  PriorModel generating;
  PriorModel solver;
};

Setup make_setup(const CalibrationConfig& config) {
  config.validate();
  Setup s{random_spd_problem(config.d, derive_key(config.rng_seed, "calibration.problem"), config.condition),
          {}, {}};
  s.problem.truth.reset();
  s.generating = make_prior(config.generating_prior, s.problem);
  s.solver = make_prior(config.solver_prior, s.problem);
  return s;
}

Vector draw_truth(const PriorModel& generating, std::uint64_t seed, std::string_view label,
                  std::size_t index) {
  RandomStream rs(seed, label, index);
  const Vector z = rs.normal_vector(generating.factor().cols());
  return add(generating.mean(), matvec(generating.factor(), z));
}

LinearProblem with_truth(const LinearProblem& base, Vector truth) {
  LinearProblem p;
  p.a = base.a;
  p.b = matvec(base.a, truth);
  p.truth = std::move(truth);
  return p;
}

SolverOptions calibration_options(const CalibrationConfig& config) {
  SolverOptions o;
  o.normalize_directions = config.normalize_directions;
  return o;
}

/// m BayesCG steps on problem; directions from `shadow` when given.
std::vector<SolverState> run_steps(const LinearProblem& problem, const PriorModel& prior,
                                   const SolverOptions& options, std::size_t m,
                                   const SolverState* shadow) {
  std::vector<SolverState> states;
  states.reserve(m + 1);
  states.push_back(initial_state(problem, prior, options));
  for (std::size_t k = 0; k < m; ++k) {
    std::optional<std::span<const double>> cand;
    if (shadow) cand = std::span<const double>(shadow->search_directions[k]);
    states.push_back(bayescg_step(states.back(), problem, prior, options, nullptr, cand));
  }
  return states;
}

struct Replication {
  std::vector<double> z;      // per iteration 0..m
  std::vector<double> trace;  // per iteration 0..m
};

Replication run_replication(const CalibrationConfig& config, const Setup& setup, std::size_t i) {
  const SolverOptions options = calibration_options(config);
  const LinearProblem problem =
      with_truth(setup.problem, draw_truth(setup.generating, config.rng_seed, "calibration.truth", i));

  std::optional<SolverState> shadow;
  if (config.directions == DirectionSource::DataIndependent) {
    const LinearProblem twin = with_truth(
        setup.problem, draw_truth(setup.generating, config.rng_seed, "calibration.shadow", i));
    shadow = run_steps(twin, setup.solver, options, config.m, nullptr).back();
  }
  const auto states = run_steps(problem, setup.solver, options, config.m, shadow ? &*shadow : nullptr);

  Replication r;
  for (const auto& s : states) {
    r.z.push_back(z_statistic(*problem.truth, s.belief));
    r.trace.push_back(s.belief.covariance_trace());
  }
  return r;
}

template <class F>
auto with_replication_index(std::size_t i, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), "replication " + std::to_string(i) + ": " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CalibrationReport run_calibration(const CalibrationConfig& config) {
  const Setup setup = make_setup(config);
  const std::size_t n = config.replications;
  std::vector<Replication> reps(n);
  parallel_for(n, [&](std::size_t i) {
    reps[i] = with_replication_index(i, [&] { return run_replication(config, setup, i); });
  });

  CalibrationReport report;
  report.reference_dof = config.d - config.m;
  const std::size_t dof = report.reference_dof;
  for (std::size_t i = 0; i < n; ++i) {
    report.z_samples.push_back(reps[i].z.back());
    for (std::size_t k = 0; k <= config.m; ++k) {
      report.rows.push_back({i, k, config.d - k, reps[i].z[k], reps[i].trace[k]});
      if (k < config.d)
        report.c_sigma0_estimate =
            std::max(report.c_sigma0_estimate, reps[i].trace[k] / static_cast<double>(config.d - k));
    }
  }
  report.z_mean = stats::mean(report.z_samples);
  report.z_standard_error = std::sqrt(2.0 * static_cast<double>(dof) / static_cast<double>(n));

  if (dof == 0) {
    // Point mass at zero: the distance is the mass that escaped it.
    const auto off = std::count_if(report.z_samples.begin(), report.z_samples.end(),
                                   [](double z) { return z > 0.0; });
    report.ks_statistic = static_cast<double>(off) / static_cast<double>(n);
  } else {
    report.ks_statistic =
        stats::ks_statistic(report.z_samples, [dof](double x) { return stats::chi2_cdf(x, dof); });
  }

  for (double level : config.levels) {
    const double q = stats::chi2_quantile(level, dof);
    const auto hit = std::count_if(report.z_samples.begin(), report.z_samples.end(),
                                   [q](double z) { return z <= q; });
    report.credible_coverage.push_back({level, static_cast<double>(hit) / static_cast<double>(n)});
  }

  report.bayesian_accuracy = with_replication_index(0, [&] {
    const LinearProblem problem = with_truth(
        setup.problem, draw_truth(setup.generating, config.rng_seed, "calibration.truth", 0));
    const auto states = run_steps(problem, setup.solver, calibration_options(config), config.m, nullptr);
    const auto exact = exact_condition(setup.solver.belief(),
                                       LinearObservations::from_state(states.back(), problem, config.m));
    return compare_beliefs(states.back().belief, exact);
  });

  if (config.measure_runtime) {
    const LinearProblem problem = with_truth(
        setup.problem, draw_truth(setup.generating, config.rng_seed, "calibration.truth", 0));
    TerminationPolicy policy;
    policy.residual_tol = std::numeric_limits<double>::min();
    policy.trace_tol = std::numeric_limits<double>::min();
    policy.max_iters = std::max<std::size_t>(config.m, 1);
    policy.breakdown_is_error = false;
    SolverOptions options = calibration_options(config);
    options.record_history = false;
    const auto t0 = std::chrono::steady_clock::now();
    (void)bayescg_solve(problem, setup.solver, policy, options);
    const double tb = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    (void)classical_cg_solve(problem, setup.solver.mean(), 0.0, policy.max_iters, false);
    const double tc = seconds_since(t1);
    report.runtime_ratio = tc > 0.0 ? tb / tc : std::numeric_limits<double>::infinity();
  }
  return report;
}

BayesianAccuracyReport bayesian_accuracy_study(const CalibrationConfig& config,
                                               const std::vector<std::size_t>& sample_sizes,
                                               std::size_t repetitions) {
  const Setup setup = make_setup(config);
  if (config.d > 200) throw Error(ErrorKind::InvalidConfig, "bayesian_accuracy_study: d must be <= 200");
  if (repetitions == 0) throw Error(ErrorKind::InvalidConfig, "bayesian_accuracy_study: repetitions must be positive");
  for (std::size_t n : sample_sizes)
    if (n < 2) throw Error(ErrorKind::InvalidConfig, "bayesian_accuracy_study: sample sizes must be >= 2");

  BayesianAccuracyReport report;
  GaussianBelief exact;
  with_replication_index(0, [&] {
    const LinearProblem problem = with_truth(
        setup.problem, draw_truth(setup.generating, config.rng_seed, "calibration.truth", 0));
    const auto states = run_steps(problem, setup.solver, calibration_options(config), config.m, nullptr);
    exact = exact_condition(setup.solver.belief(),
                            LinearObservations::from_state(states.back(), problem, config.m));
    report.analytic = compare_beliefs(states.back().belief, exact);
  });

  const std::size_t d = config.d;
  for (std::size_t si = 0; si < sample_sizes.size(); ++si) {
    const std::size_t n = sample_sizes[si];
    std::vector<AccuracyPoint> reps(repetitions);
    parallel_for(repetitions, [&](std::size_t r) {
      const auto x = sample_gaussian(exact, derive_key(config.rng_seed, "accuracy.samples", si * repetitions + r), n);
      Vector mean(d, 0.0);
      for (const auto& v : x) axpy(1.0 / static_cast<double>(n), v, mean);
      Matrix centered(d, n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(n - 1));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < d; ++i) centered(i, j) = (x[j][i] - mean[i]) * scale;
      const auto empirical = GaussianBelief::from_factor(mean, compressed_factor(centered));
      const auto dist = compare_beliefs(empirical, exact);
      AccuracyPoint& p = reps[r];
      p.mean_gap = dist.mean_diff;
      p.cov_gap = dist.cov_frobenius_diff;
      p.w2 = dist.w2;
      for (std::size_t i = 0; i < d; ++i)
        p.max_coordinate_gap = std::max(p.max_coordinate_gap, std::abs(mean[i] - exact.mean[i]));
    });
    AccuracyPoint pt;
    pt.samples = n;
    for (const auto& p : reps) {
      pt.mean_gap += p.mean_gap / static_cast<double>(repetitions);
      pt.cov_gap += p.cov_gap / static_cast<double>(repetitions);
      pt.w2 += p.w2 / static_cast<double>(repetitions);
      pt.max_coordinate_gap = std::max(pt.max_coordinate_gap, p.max_coordinate_gap);
    }
    report.points.push_back(pt);
  }

  if (report.points.size() >= 2) {
    const auto& a = report.points.front();
    const auto& b = report.points.back();
    const double dn = std::log(static_cast<double>(b.samples) / static_cast<double>(a.samples));
    auto slope = [dn](double ga, double gb) {
      return ga > 0.0 && gb > 0.0 ? std::log(gb / ga) / dn : 0.0;
    };
    report.mean_gap_slope = slope(a.mean_gap, b.mean_gap);
    report.cov_gap_slope = slope(a.cov_gap, b.cov_gap);
  }
  return report;
}

namespace {

CostArm run_cost_arm(const LinearProblem& problem, const PriorSpec& spec, std::string label,
                     std::size_t trials, std::size_t iterations) {
  const PriorModel prior = make_prior(spec, problem, false);
  TerminationPolicy policy;
  policy.residual_tol = std::numeric_limits<double>::min();
  policy.trace_tol = std::numeric_limits<double>::min();
  policy.max_iters = iterations;
  policy.breakdown_is_error = false;
  SolverOptions options;
  options.recurrence = Recurrence::TwoTerm;
  options.recompute_residual = false;
  options.covariance = CovarianceTracking::Implicit;
  options.record_history = false;
  options.diagnostics = false;

  CostArm arm;
  arm.prior = std::move(label);
  std::vector<double> ratios;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolverTrace trace = bayescg_solve(problem, prior, policy, options);
    const double tb = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    const CgResult cg = classical_cg_solve(problem, prior.mean(), 0.0, iterations, false);
    const double tc = seconds_since(t1);
    if (t == 0) {
      arm.bayescg_flops = trace.ops.flops;
      arm.cg_flops = cg.ops.flops;
      arm.op_ratio = static_cast<double>(arm.bayescg_flops) / static_cast<double>(arm.cg_flops);
    }
    const double ratio = tc > 0.0 ? tb / tc : std::numeric_limits<double>::infinity();
    arm.trials.push_back({t, tb, tc, ratio});
    ratios.push_back(ratio);
  }
  arm.median_wall_ratio = median(ratios);
  return arm;
}

}  // namespace

CostReport cost_factor_study(std::size_t d, const PriorSpec& dense_prior, std::size_t trials,
                             std::uint64_t seed, std::size_t iterations) {
  if (d == 0 || trials == 0 || iterations == 0)
    throw Error(ErrorKind::InvalidConfig, "cost_factor_study: d, trials and iterations must be positive");
  iterations = std::min(iterations, d);
  // Condition 100 keeps CG far from convergence over the timed iterations.
  const LinearProblem problem = random_spd_problem(d, derive_key(seed, "cost.problem"), 100.0);
  const PriorModel dense_model = make_prior(dense_prior, problem, false);

  Vector diag(d);
  const Matrix cov = dense_prior.kind == PriorKind::SparseDiagonal ? Matrix{} : dense_model.covariance();
  for (std::size_t i = 0; i < d; ++i)
    diag[i] = dense_prior.kind == PriorKind::SparseDiagonal ? dense_prior.diagonal[i] : cov(i, i);
  PriorSpec sparse = PriorSpec::sparse_diagonal(diag);
  sparse.mean = dense_prior.mean;

  CostReport report;
  report.d = d;
  report.iterations = iterations;
  report.dense = run_cost_arm(problem, dense_prior, std::string(prior_kind_name(dense_prior.kind)),
                              trials, iterations);
  report.sparse = run_cost_arm(problem, sparse, "sparse-diag", trials, iterations);
  return report;
}

}  // namespace bcglab
