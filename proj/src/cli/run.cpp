#include <cmath>
#include <ostream>

#include "bcglab/calibration.hpp"
#include "bcglab/cli.hpp"
#include "bcglab/io.hpp"
#include "bcglab/rng.hpp"
#include "bcglab/stats.hpp"

namespace bcglab::cli {

using io::cell;

PriorSpec resolve_prior(const std::string& name, std::size_t dim) {
  if (name == "identity") return PriorSpec::identity();
  if (name == "natural") return PriorSpec::natural();
  if (name == "inverse-a") return PriorSpec::inverse_a();
  if (name == "sparse-diag") return PriorSpec::sparse_diagonal(Vector(dim, 1.0));
  if (name.starts_with("file:")) {
    Matrix cov = io::read_matrix_file(name.substr(5));
    if (cov.rows() != dim || cov.cols() != dim)
      throw Error(ErrorKind::InvalidPrior, "prior covariance in '" + name.substr(5) + "' is " +
                                               std::to_string(cov.rows()) + "x" + std::to_string(cov.cols()) +
                                               ", problem needs " + std::to_string(dim) + "x" +
                                               std::to_string(dim));
    return PriorSpec::user(std::move(cov));
  }
  throw Error(ErrorKind::Usage, "unknown prior '" + name + "'");
}

LinearProblem build_problem(const ExperimentConfig& cfg) {
  switch (cfg.source) {
    case ProblemSource::File: return io::read_problem_file(cfg.problem_file);
    case ProblemSource::RandomRank:
      return random_rank_problem(cfg.c, cfg.d, cfg.rank, derive_key(cfg.seed, "cli.problem"),
                                 cfg.rhs == "in-range" ? RhsKind::InRange : RhsKind::Generic);
    case ProblemSource::RandomSpd: break;
  }
  return random_spd_problem(cfg.d, derive_key(cfg.seed, "cli.problem"), cfg.condition);
}

namespace {

std::string optional_cell(std::optional<double> v) { return v ? cell(*v) : std::string(); }

std::string json_body(const ExperimentConfig& cfg, json result, json extra = nullptr) {
  json j;
  j["config"] = config_to_json(cfg);
  j["result"] = std::move(result);
  if (!extra.is_null())
    for (auto& [k, v] : extra.items()) j[k] = v;
  return j.dump(1) + "\n";
}

RunOutput finish(const ExperimentConfig& cfg, const io::CsvTable& table, json result, json extra = nullptr) {
  RunOutput out;
  if (cfg.format == OutputFormat::Json) {
    out.body = json_body(cfg, std::move(result), std::move(extra));
  } else {
    out.body = table.str();
    out.sidecar = config_to_json(cfg).dump(1) + "\n";
  }
  return out;
}

RunOutput run_solve(const ExperimentConfig& cfg) {
  const LinearProblem problem = build_problem(cfg);
  const PriorModel prior = make_prior(resolve_prior(cfg.prior, problem.cols()), problem);
  const SolverTrace trace = bayescg_solve(problem, prior, cfg.policy);

  const GaussianBelief prior_belief = prior.belief();
  io::CsvTable t({"replication", "iteration", "residual_norm", "relative_residual", "covariance_trace",
                  "d_minus_m", "trace_diagnostic", "error_norm", "conjugacy_scalar", "step_length",
                  "max_conjugacy_defect"});
  for (const auto& it : trace.iterations) {
    std::optional<double> diag, err;
    try {
      diag = trace_diagnostic(GaussianBelief::from_factor(it.mean, it.covariance_factor), prior_belief);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularPrior) throw;
    }
    if (problem.truth) err = norm2(sub(it.mean, *problem.truth));
    t.add_row({cell(std::size_t{0}), cell(it.m), cell(it.residual_norm),
               cell(trace.rhs_norm > 0.0 ? it.residual_norm / trace.rhs_norm : it.residual_norm),
               cell(it.covariance_trace), cell(problem.cols() - it.m), optional_cell(diag), optional_cell(err),
               cell(it.conjugacy_scalar), cell(it.step_length), cell(it.max_conjugacy_defect)});
  }
  json summary{{"stop", trace.stop}, {"iterations", trace.final_state.m}};
  return finish(cfg, t, trace, json{{"summary", summary}});
}

std::vector<WeightTag> selected_weights(const std::string& name) {
  if (name == "all")
    return {WeightTag::Euclidean, WeightTag::AWeighted, WeightTag::Sigma0Weighted, WeightTag::ASigma0AtWeighted};
  return {*parse_weight_tag(name)};
}

RunOutput run_oracle(const ExperimentConfig& cfg) {
  const LinearProblem problem = build_problem(cfg);
  const OracleStudy study = run_oracle_study(problem, resolve_prior(cfg.prior, problem.cols()), cfg.policy,
                                             selected_weights(cfg.weight));
  io::CsvTable t({"replication", "iteration", "comparison", "weight", "basis", "mean_diff",
                  "cov_frobenius_diff", "w2", "angle"});
  for (const auto& r : study.rows)
    t.add_row({cell(std::size_t{0}), cell(r.m), r.comparison, r.weight, r.basis, cell(r.distance.mean_diff),
               cell(r.distance.cov_frobenius_diff), cell(r.distance.w2), cell(r.angle)});
  return finish(cfg, t, study);
}

RunOutput run_pinv(const ExperimentConfig& cfg) {
  PinvStudyConfig pc;
  pc.rows = cfg.c;
  pc.cols = cfg.d;
  pc.rank = cfg.rank;
  pc.prior = resolve_prior(cfg.prior, cfg.d);
  pc.rhs = cfg.rhs == "in-range" ? RhsKind::InRange : RhsKind::Generic;
  pc.replications = cfg.replications;
  pc.rng_seed = cfg.seed;
  pc.policy = cfg.policy;
  const PinvStudyReport report = run_pinv_study(pc);
  io::CsvTable t({"replication", "iteration", "residual_norm", "distance_to_pinv"});
  for (const auto& rep : report.replications)
    for (const auto& h : rep.history)
      t.add_row({cell(rep.replication), cell(h.m), cell(h.residual_norm), cell(h.distance_to_pinv)});
  return finish(cfg, t, report);
}

std::string level_column(double level) {
  return "covered_" + std::to_string(static_cast<int>(std::lround(level * 100.0)));
}

RunOutput run_calibrate(const ExperimentConfig& cfg) {
  CalibrationConfig cc = scenario_config(*parse_scenario(cfg.scenario), cfg.d, cfg.m.value_or(5),
                                         cfg.replications, cfg.seed);
  cc.condition = cfg.condition;
  cc.directions = cfg.directions == "data-independent" ? DirectionSource::DataIndependent : DirectionSource::Adaptive;
  cc.measure_runtime = cfg.timings;
  const CalibrationReport report = run_calibration(cc);

  std::vector<std::string> header{"replication", "iteration", "dof", "z", "covariance_trace"};
  for (double level : cc.levels) header.push_back(level_column(level));
  io::CsvTable t(header);
  std::vector<std::vector<double>> quantiles(cc.d + 1);
  for (const auto& r : report.rows) {
    auto& q = quantiles[r.dof];
    if (q.empty())
      for (double level : cc.levels) q.push_back(stats::chi2_quantile(level, r.dof));
    std::vector<std::string> row{cell(r.replication), cell(r.iteration), cell(r.dof), cell(r.z),
                                 cell(r.covariance_trace)};
    for (double qv : q) row.push_back(r.z <= qv ? "1" : "0");
    t.add_row(std::move(row));
  }
  json extra;
  if (!cfg.accuracy_samples.empty()) extra["accuracy"] = bayesian_accuracy_study(cc, cfg.accuracy_samples);
  return finish(cfg, t, report, extra);
}

PriorSpec dense_cost_prior(const std::string& name, std::size_t d) {
  // The dense arm applies the prior as a stored matrix even when it is
  // the identity; that is the configuration the cost remark is about.
  if (name == "identity" || name == "sparse-diag") return PriorSpec::user(Matrix::identity(d));
  return resolve_prior(name, d);
}

RunOutput run_cost(const ExperimentConfig& cfg) {
  const CostReport report =
      cost_factor_study(cfg.d, dense_cost_prior(cfg.prior, cfg.d), cfg.trials, cfg.seed, cfg.iterations);
  io::CsvTable t({"replication", "iteration", "arm", "bayescg_seconds", "cg_seconds", "wall_ratio",
                  "bayescg_flops", "cg_flops", "op_ratio"});
  for (const CostArm* arm : {&report.dense, &report.sparse})
    for (const auto& tr : arm->trials)
      t.add_row({cell(tr.trial), cell(report.iterations), arm->prior, cell(tr.bayescg_seconds),
                 cell(tr.cg_seconds), cell(tr.wall_ratio), cell(static_cast<std::size_t>(arm->bayescg_flops)),
                 cell(static_cast<std::size_t>(arm->cg_flops)), cell(arm->op_ratio)});
  return finish(cfg, t, report);
}

RunOutput run_invariants_cmd(const ExperimentConfig& cfg) {
  const auto rows = run_invariants(cfg.d, cfg.replications, cfg.seed, cfg.condition);
  io::CsvTable t({"replication", "iteration", "prior", "invariant", "value", "expected", "tolerance", "pass"});
  std::size_t failures = 0;
  for (const auto& r : rows) {
    failures += !r.pass;
    t.add_row({cell(r.problem), cell(r.m), r.prior, r.invariant, cell(r.value), cell(r.expected),
               cell(r.tolerance), r.pass ? "1" : "0"});
  }
  RunOutput out = finish(cfg, t, rows, json{{"violations", failures}});
  out.status = failures ? kExitViolation : kExitOk;
  return out;
}

json error_record(std::string_view kind, const std::string& message, int code) {
  return json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.command) {
    case Command::Solve: return run_solve(cfg);
    case Command::OracleCompare: return run_oracle(cfg);
    case Command::PinvStudy: return run_pinv(cfg);
    case Command::Calibrate: return run_calibrate(cfg);
    case Command::CostStudy: return run_cost(cfg);
    case Command::Invariants: return run_invariants_cmd(cfg);
  }
  throw Error(ErrorKind::Usage, "unknown command");
}

int run_and_serialize(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  RunOutput result;
  try {
    result = run_experiment(cfg);
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << error_record(error_kind_name(e.kind()), e.what(), code).dump() << "\n";
    return code;
  } catch (const std::exception& e) {
    err << error_record("Unexpected", e.what(), kExitFailure).dump() << "\n";
    return kExitFailure;
  }
  try {
    if (cfg.out.empty()) {
      out << result.body;
      out.flush();
      // CSV has no room for a header block; the config goes to stderr.
      if (!result.sidecar.empty()) err << json{{"config", config_to_json(cfg)}}.dump() << "\n";
    } else {
      io::write_atomic(cfg.out, result.body);
      if (!result.sidecar.empty()) io::write_atomic(cfg.out + ".config.json", result.sidecar);
    }
  } catch (const std::exception& e) {
    err << error_record("WriteError", e.what(), kExitWrite).dump() << "\n";
    return kExitWrite;
  }
  return result.status;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << error_record(error_kind_name(e.kind()), e.what(), code).dump() << "\n";
    return code;
  }
  return run_and_serialize(cfg, out, err);
}

}  // namespace bcglab::cli
