#include <doctest.h>

#include <cmath>
#include <limits>

#include "bcglab/oracle.hpp"
#include "bcglab/prior.hpp"
#include "bcglab/rng.hpp"
#include "bcglab/solver.hpp"
#include "oracles.hpp"

using namespace bcglab;
using oracle::E;

namespace {

TerminationPolicy run_to(std::size_t d) {
  TerminationPolicy p;
  p.residual_tol = std::numeric_limits<double>::min();
  p.trace_tol = std::numeric_limits<double>::min();
  p.max_iters = d;
  return p;
}

std::vector<PriorSpec> corpus_priors(std::size_t d, std::uint64_t seed) {
  return {PriorSpec::identity(), PriorSpec::inverse_a(), PriorSpec::natural(),
          PriorSpec::user(random_spd_matrix(d, seed, 20.0))};
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("exact_condition examples") {
  const LinearProblem p = random_spd_problem(5, 2);
  const PriorModel prior = make_prior(PriorSpec::identity(), p);
  LinearObservations none;
  none.op = p.a;
  CHECK(exact_condition(prior.belief(), none) == prior.belief());

  LinearObservations full;
  full.op = p.a;
  for (std::size_t i = 0; i < 5; ++i) {
    Vector e(5, 0.0);
    e[i] = 1.0;
    full.directions.push_back(e);
    full.values.push_back(p.b[i]);
  }
  const GaussianBelief dirac = exact_condition(prior.belief(), full);
  CHECK(dirac.covariance_trace() <= 1e-12);
  CHECK(norm2(sub(dirac.mean, *p.truth)) <= 1e-10 * norm2(*p.truth));

  LinearObservations dup = full;
  dup.directions[1] = dup.directions[0];
  CHECK_THROWS_AS(exact_condition(prior.belief(), dup), Error);
}

TEST_CASE("exact_condition matches the textbook formula") {
  const std::size_t d = 12;
  const LinearProblem p = random_spd_problem(d, 9);
  const PriorModel prior = make_prior(PriorSpec::user(random_spd_matrix(d, 10, 5.0)), p);
  RandomStream rs(3, "obs");
  LinearObservations obs;
  obs.op = p.a;
  for (int i = 0; i < 5; ++i) {
    obs.directions.push_back(rs.normal_vector(d));
    obs.values.push_back(dot(obs.directions.back(), p.b));
  }
  const GaussianBelief got = exact_condition(prior.belief(), obs);
  const auto ref = oracle::condition(E(prior.mean()), E(prior.covariance()), E(p.a),
                                     E(Matrix::from_columns(obs.directions, d)), E(obs.values));
  CHECK((E(got.mean) - ref.mean).norm() <= 1e-10 * (1 + ref.mean.norm()));
  CHECK((E(got.covariance()) - ref.cov).norm() <= 1e-10 * E(prior.covariance()).norm());
}

TEST_CASE("solver belief equals exact conditioning on its own observations") {
  for (std::size_t d : {2u, 10u, 40u, 100u}) {
    const LinearProblem p = random_spd_problem(d, 1000 + d);
    for (const PriorSpec& spec : corpus_priors(d, d)) {
      CAPTURE(d);
      CAPTURE(prior_kind_name(spec.kind));
      const PriorModel prior = make_prior(spec, p);
      const SolverTrace t = bayescg_solve(p, prior, run_to(d));
      double worst_mean = 0, worst_cov = 0;
      for (const auto& it : t.iterations) {
        const auto obs = LinearObservations::from_state(t.final_state, p, it.m);
        const GaussianBelief ref = exact_condition(prior.belief(), obs);
        const GaussianBelief got = GaussianBelief::from_factor(it.mean, it.covariance_factor);
        worst_mean = std::max(worst_mean, norm2(sub(got.mean, ref.mean)));
        worst_cov = std::max(worst_cov, frobenius_norm(sub(got.covariance(), ref.covariance())));
      }
      CHECK(worst_mean <= 1e-8);
      CHECK(worst_cov <= 1e-8);
    }
  }
}

TEST_CASE("diag(2, 4) worked case agrees with the solver's first step") {
  LinearProblem p;
  p.a = Matrix{{2, 0}, {0, 4}};
  p.b = {2, 4};
  const PriorModel prior = make_prior(PriorSpec::identity(), p);
  LinearObservations obs;
  obs.op = p.a;
  obs.directions = {p.b};
  obs.values = {dot(p.b, p.b)};
  const GaussianBelief ref = exact_condition(prior.belief(), obs);
  const SolverState s1 = bayescg_step(initial_state(p, prior, {}), p, prior);
  const BeliefDistance dist = compare_beliefs(s1.belief, ref);
  CHECK(dist.mean_diff <= 1e-14);
  CHECK(dist.cov_frobenius_diff <= 1e-14);
  CHECK(dist.w2 <= 1e-7);
}

TEST_CASE("build_mu_m examples") {
  const std::size_t d = 4;
  const GaussianBelief prior = GaussianBelief::from_factor(Vector(d, 0.0), Matrix::identity(d));
  const Vector truth{3, -1, 2, 5};
  const auto w = InnerProductWeight::euclidean(d);
  const GaussianBelief mu1 = build_mu_m(prior, truth, std::vector<Vector>{{1, 0, 0, 0}}, w);
  CHECK(norm2(sub(mu1.mean, Vector{3, 0, 0, 0})) <= 1e-15);
  const Matrix c = mu1.covariance();
  CHECK(frobenius_norm(sub(c, Matrix::diagonal(Vector{0, 1, 1, 1}))) <= 1e-15);

  const GaussianBelief mu0 = build_mu_m(prior, truth, {}, w);
  CHECK(compare_beliefs(mu0, prior) == BeliefDistance{});
}

TEST_CASE("mu_m endpoints are exact for every weight") {
  for (std::size_t d : {5u, 20u}) {
    const LinearProblem p = random_spd_problem(d, 50 + d);
    for (const PriorSpec& spec : corpus_priors(d, 7)) {
      const PriorModel prior = make_prior(spec, p);
      const SolverTrace t = bayescg_solve(p, prior, run_to(d));
      REQUIRE(t.final_state.m == d);
      const WeightSet ws = standard_weights(p, prior);
      CHECK(ws.weights.size() == 4);
      for (const auto& w : ws.weights) {
        CAPTURE(weight_tag_name(w.tag()));
        const GaussianBelief mu0 = build_mu_m(prior.belief(), *p.truth, {}, w);
        const GaussianBelief mud = build_mu_m(prior.belief(), *p.truth, t.final_state.krylov_basis, w);
        CHECK(compare_beliefs(mu0, prior.belief()) == BeliefDistance{});
        CHECK(compare_beliefs(mud, GaussianBelief::dirac(*p.truth)) == BeliefDistance{});
      }
    }
  }
}

TEST_CASE("mu_m under the prior weight on the solution space is the solver belief") {
  const std::size_t d = 15;
  const LinearProblem p = random_spd_problem(d, 31);
  const PriorModel prior = make_prior(PriorSpec::user(random_spd_matrix(d, 32, 8.0)), p);
  const SolverTrace t = bayescg_solve(p, prior, run_to(d));
  const InnerProductWeight w(WeightTag::Sigma0Weighted, prior.precision());
  for (const auto& it : t.iterations) {
    const std::span<const Vector> basis(t.final_state.krylov_basis.data(), it.m);
    const GaussianBelief mu = build_mu_m(prior.belief(), *p.truth, basis, w);
    const BeliefDistance dist =
        compare_beliefs(mu, GaussianBelief::from_factor(it.mean, it.covariance_factor));
    CHECK(dist.mean_diff <= 1e-8);
    CHECK(dist.cov_frobenius_diff <= 1e-8);
  }
}

TEST_CASE("compare_beliefs examples") {
  const auto a = GaussianBelief::from_factor({1, 2}, Matrix{{1, 0}, {0.5, 2}});
  CHECK(compare_beliefs(a, a) == BeliefDistance{});
  auto b = a;
  b.mean = {4, 6};
  const BeliefDistance dist = compare_beliefs(a, b);
  CHECK(dist.mean_diff == doctest::Approx(5.0));
  CHECK(dist.cov_frobenius_diff == 0.0);
  CHECK(dist.w2 == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(compare_beliefs(a, GaussianBelief::dirac({0, 0, 0})), Error);
}

TEST_CASE("kernel angles: report produced, one candidate aligned") {
  const std::size_t d = 12;
  const LinearProblem p = random_spd_problem(d, 71);
  const PriorModel prior = make_prior(PriorSpec::user(random_spd_matrix(d, 72, 6.0)), p);
  const SolverTrace t = bayescg_solve(p, prior, run_to(d));
  const WeightSet ws = standard_weights(p, prior);
  for (std::size_t m = 1; m < d; ++m) {
    const auto& it = t.iterations[m];
    const auto angles = kernel_krylov_angles(GaussianBelief::from_factor(it.mean, it.covariance_factor),
                                             t.final_state, m, p, ws);
    CHECK(angles.size() == 2 * ws.weights.size());
    double best = 10.0;
    for (const auto& a : angles) {
      CHECK(a.angle >= 0.0);
      CHECK(a.angle <= std::acos(-1.0) / 2 + 1e-12);
      best = std::min(best, a.angle);
    }
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("oracle study rows cover every m, weight and basis") {
  const std::size_t d = 8;
  const LinearProblem p = random_spd_problem(d, 5);
  const OracleStudy s = run_oracle_study(p, PriorSpec::identity(), run_to(d),
                                         {WeightTag::Euclidean, WeightTag::AWeighted,
                                          WeightTag::Sigma0Weighted, WeightTag::ASigma0AtWeighted});
  CHECK(s.iterations == d);
  std::size_t exact = 0, mu = 0;
  for (const auto& r : s.rows) {
    CHECK(r.distance.mean_diff >= 0.0);
    CHECK(r.distance.w2 >= 0.0);
    if (r.comparison == "exact_condition") {
      ++exact;
      CHECK(r.distance.mean_diff <= 1e-8);
    }
    mu += r.comparison == "mu_m";
  }
  CHECK(exact == d + 1);
  CHECK(mu == (d + 1) * 4 * 2);
  CHECK(s == run_oracle_study(p, PriorSpec::identity(), run_to(d),
                              {WeightTag::Euclidean, WeightTag::AWeighted, WeightTag::Sigma0Weighted,
                               WeightTag::ASigma0AtWeighted}));
}

TEST_CASE("non-SPD weights are skipped with a reason") {
  LinearProblem p = random_nonsymmetric_problem(6, 4);
  const PriorModel prior = make_prior(PriorSpec::identity(), p);
  const WeightSet ws = standard_weights(p, prior);
  CHECK(ws.weights.size() == 3);
  REQUIRE(ws.skipped.size() == 1);
  CHECK(ws.skipped[0].first == WeightTag::AWeighted);
}

}
