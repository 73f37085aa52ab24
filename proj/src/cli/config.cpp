#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "bcglab/calibration.hpp"
#include "bcglab/cli.hpp"
#include "bcglab/io.hpp"

namespace bcglab::cli {

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::Solve, "solve"},          {Command::Calibrate, "calibrate"},
    {Command::OracleCompare, "oracle-compare"}, {Command::PinvStudy, "pinv-study"},
    {Command::CostStudy, "cost-study"}, {Command::Invariants, "invariants"},
};

}  // namespace

std::string_view command_name(Command c) noexcept {
  for (auto [k, n] : kCommands)
    if (k == c) return n;
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) noexcept {
  for (auto [k, n] : kCommands)
    if (n == name) return k;
  return std::nullopt;
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::InvalidConfig: return kExitUsage;
    case ErrorKind::File: return kExitInput;
    default: return kExitNumerical;
  }
}

namespace {

enum CommandBit : unsigned {
  kSolve = 1u << 0,
  kCalibrate = 1u << 1,
  kOracle = 1u << 2,
  kPinv = 1u << 3,
  kCost = 1u << 4,
  kInvariants = 1u << 5,
  kAll = 0x3fu,
};

unsigned bit(Command c) { return 1u << static_cast<unsigned>(c); }

struct FlagInfo {
  std::string_view name;
  unsigned commands;
  std::string_view help;
};

constexpr FlagInfo kFlags[] = {
    {"d", kAll, "problem dimension (columns of A)"},
    {"c", kSolve | kOracle | kPinv, "rows of A; selects a random rank-r problem"},
    {"rank", kSolve | kOracle | kPinv, "rank of the random rank-r problem"},
    {"seed", kAll, "top-level 64-bit seed"},
    {"problem-file", kSolve | kOracle, "bcglab-problem JSON file"},
    {"condition", kSolve | kOracle | kCalibrate | kInvariants, "condition number of random SPD operators"},
    {"prior", kSolve | kOracle | kPinv | kCost, "identity | natural | inverse-a | sparse-diag | file:PATH"},
    {"m", kSolve | kOracle | kCalibrate, "solver steps"},
    {"replications", kCalibrate | kPinv | kInvariants, "replications (problems, for invariants)"},
    {"weight", kOracle, "euclid | a | sigma0 | asigma0at | all"},
    {"rhs", kSolve | kOracle | kPinv, "in-range | generic right-hand side for rank-r problems"},
    {"scenario", kCalibrate, "well-specified | over-dispersed | under-dispersed | wrong-mean | wrong-correlation"},
    {"directions", kCalibrate, "adaptive | data-independent"},
    {"accuracy-samples", kCalibrate, "comma-separated sample sizes for the Bayesian accuracy study (json only)"},
    {"trials", kCost, "timing trials per arm"},
    {"iterations", kCost, "iterations per timed solve"},
    {"timings", kCalibrate, "record the BayesCG/CG wall-time ratio (non-deterministic)"},
    {"max-iters", kSolve | kOracle | kPinv, "iteration cap (0: min(c, d))"},
    {"residual-tol", kSolve | kOracle | kPinv, "relative residual tolerance"},
    {"trace-tol", kSolve | kOracle | kPinv, "relative covariance-trace tolerance"},
    {"out", kAll, "output path (default stdout)"},
    {"format", kAll, "csv | json"},
};

const FlagInfo* find_flag(std::string_view name) {
  for (const auto& f : kFlags)
    if (f.name == name) return &f;
  return nullptr;
}

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }

struct Raw {
  std::map<std::string, std::vector<std::string>> values;
  std::vector<std::string> config_file;
  int timings = 0;
};

std::unique_ptr<CLI::App> make_app(Raw& raw) {
  auto app = std::make_unique<CLI::App>("BayesCG probabilistic linear-solver lab", "bayescg-lab");
  app->fallthrough();
  app->require_subcommand(0, 1);
  app->add_option("--config", raw.config_file, "JSON file of defaults; flags override it")
      ->allow_extra_args(false);
  for (const auto& f : kFlags) {
    if (f.name == "timings") {
      app->add_flag("--timings", raw.timings, std::string(f.help));
      continue;
    }
    app->add_option("--" + std::string(f.name), raw.values[std::string(f.name)], std::string(f.help))
        ->allow_extra_args(false)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }
  app->add_subcommand("solve", "run BayesCG and report every iteration");
  app->add_subcommand("calibrate", "Z-statistic calibration over randomized problems");
  app->add_subcommand("oracle-compare", "solver beliefs against exact conditioning and mu_m");
  app->add_subcommand("pinv-study", "BayesCG on singular/rectangular systems vs A^+ b");
  app->add_subcommand("cost-study", "BayesCG/CG cost ratio, dense and sparse-diagonal priors");
  app->add_subcommand("invariants", "check the solver invariants on a random corpus");
  app->footer(
      "Exit codes: 0 ok, 1 unexpected failure, 2 usage or config error, 3 input file error,\n"
      "4 numerical error (module rejected the problem or broke down), 5 output write error,\n"
      "6 invariants violated.\n"
      "Environment: BAYESCG_LAB_THREADS caps worker threads; BAYESCG_LAB_KERNELS selects\n"
      "scalar | avx2 | neon | auto inner-loop kernels.");
  return app;
}

std::string json_scalar_text(const std::string& key, const json& v) {
  switch (v.type()) {
    case json::value_t::string: return v.get<std::string>();
    case json::value_t::boolean: return v.get<bool>() ? "true" : "false";
    case json::value_t::number_unsigned: return std::to_string(v.get<std::uint64_t>());
    case json::value_t::number_integer: return std::to_string(v.get<std::int64_t>());
    case json::value_t::number_float: return io::format_double(v.get<double>());
    case json::value_t::array: {
      std::string s;
      for (const auto& e : v) {
        if (!s.empty()) s += ',';
        s += json_scalar_text(key, e);
      }
      return s;
    }
    default: usage("config key '" + key + "' has an unsupported value type");
  }
}

std::uint64_t to_u64(const std::string& flag, const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end)
    usage("--" + flag + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

double to_real(const std::string& flag, const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end || !std::isfinite(v))
    usage("--" + flag + ": expected a finite number, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& flag, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  usage("--" + flag + ": expected true or false, got '" + s + "'");
}

void check_choice(const std::string& flag, const std::string& v, std::initializer_list<std::string_view> ok) {
  for (auto o : ok)
    if (v == o) return;
  std::string list;
  for (auto o : ok) list += (list.empty() ? "" : " | ") + std::string(o);
  usage("--" + flag + ": '" + v + "' is not one of " + list);
}

void check_file(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorKind::File, "input file '" + path + "' does not exist or is not a regular file");
}

}  // namespace

std::string help_text() {
  Raw raw;
  return make_app(raw)->help();
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  Raw raw;
  auto app = make_app(raw);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app->get_subcommands();
    throw HelpRequested{subs.empty() ? app->help() : subs.front()->help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app->help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  // Merge: config file first, flags override whole keys.
  std::map<std::string, std::vector<std::string>> merged;
  std::optional<std::string> file_command;
  if (raw.config_file.size() > 1) usage("--config given more than once");
  if (!raw.config_file.empty()) {
    const std::string& path = raw.config_file.front();
    check_file(path);
    json j;
    try {
      j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::File, path + ": " + e.what());
    }
    if (!j.is_object()) usage("config file '" + path + "' must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "command") {
        file_command = json_scalar_text(key, value);
        continue;
      }
      if (!find_flag(key)) usage("config file '" + path + "': unknown key '" + key + "'");
      merged[key] = {json_scalar_text(key, value)};
    }
  }
  for (auto& [key, vals] : raw.values)
    if (!vals.empty()) merged[key] = vals;
  if (raw.timings > 0) merged["timings"] = {"true"};

  ExperimentConfig cfg;
  const auto subs = app->get_subcommands();
  std::optional<Command> cmd;
  if (!subs.empty()) cmd = parse_command(subs.front()->get_name());
  if (file_command) {
    const auto fc = parse_command(*file_command);
    if (!fc) usage("config file: unknown command '" + *file_command + "'");
    if (cmd && *cmd != *fc)
      usage("command '" + std::string(command_name(*cmd)) + "' conflicts with config file command '" +
            *file_command + "'");
    cmd = fc;
  }
  if (!cmd) usage("no command given; expected one of solve, calibrate, oracle-compare, pinv-study, cost-study, invariants");
  cfg.command = *cmd;

  for (const auto& [key, vals] : merged) {
    const FlagInfo* f = find_flag(key);
    if (!(f->commands & bit(cfg.command)))
      usage("--" + key + " does not apply to " + std::string(command_name(cfg.command)));
    for (const auto& v : vals)
      if (v != vals.front()) usage("conflicting values for --" + key + ": '" + vals.front() + "' and '" + v + "'");
  }
  auto has = [&](const char* k) { return merged.contains(k); };
  auto get = [&](const char* k) { return merged.at(k).front(); };

  // Command-dependent defaults.
  switch (cfg.command) {
    case Command::Calibrate: cfg.replications = 2000; cfg.m = 5; break;
    case Command::PinvStudy: cfg.replications = 100; break;
    case Command::Invariants: cfg.replications = 20; break;
    case Command::CostStudy: cfg.d = 1000; break;
    default: break;
  }

  if (has("d")) cfg.d = to_u64("d", get("d"));
  if (cfg.d == 0) usage("--d must be positive");
  cfg.c = has("c") ? to_u64("c", get("c")) : cfg.d;
  if (cfg.c == 0) usage("--c must be positive");
  if (has("rank")) cfg.rank = to_u64("rank", get("rank"));
  else cfg.rank = cfg.command == Command::PinvStudy ? std::max<std::size_t>(1, std::min(cfg.c, cfg.d) / 2)
                                                    : std::min(cfg.c, cfg.d);
  if (has("seed")) cfg.seed = to_u64("seed", get("seed"));
  if (has("condition")) {
    cfg.condition = to_real("condition", get("condition"));
    if (cfg.condition < 1.0) usage("--condition must be >= 1");
  }

  if (has("problem-file")) {
    if (has("c") || has("rank") || has("condition") || has("d"))
      usage("--problem-file conflicts with --d/--c/--rank/--condition");
    cfg.source = ProblemSource::File;
    cfg.problem_file = get("problem-file");
    check_file(cfg.problem_file);
  } else if (cfg.command == Command::PinvStudy || has("c") || has("rank")) {
    cfg.source = ProblemSource::RandomRank;
    if (has("condition")) usage("--condition applies to random SPD problems, not rank-r problems");
  }

  if (has("prior")) {
    cfg.prior = get("prior");
    if (cfg.prior.starts_with("file:")) {
      if (cfg.prior.size() == 5) usage("--prior file: needs a path");
      check_file(cfg.prior.substr(5));
    } else {
      check_choice("prior", cfg.prior, {"identity", "natural", "inverse-a", "sparse-diag"});
    }
  }

  if (has("residual-tol")) cfg.policy.residual_tol = to_real("residual-tol", get("residual-tol"));
  if (has("trace-tol")) cfg.policy.trace_tol = to_real("trace-tol", get("trace-tol"));
  if (cfg.policy.residual_tol < 0.0 || cfg.policy.trace_tol < 0.0) usage("tolerances must be non-negative");
  if (has("max-iters")) cfg.policy.max_iters = to_u64("max-iters", get("max-iters"));
  if (has("m")) {
    const std::size_t m = to_u64("m", get("m"));
    if (cfg.command == Command::Calibrate) {
      cfg.m = m;
    } else {
      // A step count for a single solve is an iteration cap.
      if (m == 0) usage("--m must be positive for " + std::string(command_name(cfg.command)));
      if (has("max-iters") && cfg.policy.max_iters != m) usage("--m and --max-iters disagree");
      cfg.policy.max_iters = m;
    }
  }
  if (cfg.command == Command::PinvStudy) cfg.policy.breakdown_is_error = false;

  if (has("replications")) cfg.replications = to_u64("replications", get("replications"));
  if ((cfg.command == Command::Calibrate || cfg.command == Command::PinvStudy ||
       cfg.command == Command::Invariants) && cfg.replications == 0)
    usage("--replications must be positive");

  if (has("weight")) {
    cfg.weight = get("weight");
    if (cfg.weight != "all" && !parse_weight_tag(cfg.weight))
      usage("--weight: '" + cfg.weight + "' is not one of euclid | a | sigma0 | asigma0at | all");
  }
  if (has("rhs")) {
    cfg.rhs = get("rhs");
    check_choice("rhs", cfg.rhs, {"in-range", "generic"});
    if (cfg.source != ProblemSource::RandomRank) usage("--rhs applies to rank-r problems only");
  }
  if (has("scenario")) {
    cfg.scenario = get("scenario");
    if (!parse_scenario(cfg.scenario))
      usage("--scenario: '" + cfg.scenario +
            "' is not one of well-specified | over-dispersed | under-dispersed | wrong-mean | wrong-correlation");
  }
  if (has("directions")) {
    cfg.directions = get("directions");
    check_choice("directions", cfg.directions, {"adaptive", "data-independent"});
  }
  if (has("accuracy-samples")) {
    const std::string s = get("accuracy-samples");
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const std::size_t next = std::min(s.find(',', pos), s.size());
      const std::size_t n = to_u64("accuracy-samples", s.substr(pos, next - pos));
      if (n < 2) usage("--accuracy-samples entries must be >= 2");
      cfg.accuracy_samples.push_back(n);
      pos = next + 1;
    }
  }
  if (has("trials")) cfg.trials = to_u64("trials", get("trials"));
  if (has("iterations")) cfg.iterations = to_u64("iterations", get("iterations"));
  if (cfg.command == Command::CostStudy && (cfg.trials == 0 || cfg.iterations == 0))
    usage("--trials and --iterations must be positive");
  if (has("timings")) cfg.timings = to_bool("timings", get("timings"));

  if (has("out")) cfg.out = get("out");
  if (has("format")) {
    const std::string f = get("format");
    check_choice("format", f, {"csv", "json"});
    cfg.format = f == "json" ? OutputFormat::Json : OutputFormat::Csv;
  }
  if (!cfg.accuracy_samples.empty() && cfg.format != OutputFormat::Json)
    usage("--accuracy-samples output requires --format json");
  if (cfg.command == Command::Calibrate && cfg.m && *cfg.m > cfg.d) usage("--m must not exceed --d");
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  const unsigned b = bit(cfg.command);
  json j;
  j["command"] = command_name(cfg.command);
  auto put = [&](const char* key, auto value) {
    if (find_flag(key)->commands & b) j[key] = value;
  };
  const bool problem_cmd = cfg.command == Command::Solve || cfg.command == Command::OracleCompare;
  if (cfg.source == ProblemSource::File) {
    j["problem-file"] = cfg.problem_file;
  } else {
    put("d", cfg.d);
    if (cfg.source == ProblemSource::RandomRank) {
      put("c", cfg.c);
      put("rank", cfg.rank);
      put("rhs", cfg.rhs);
    } else if (cfg.command != Command::CostStudy) {
      put("condition", cfg.condition);
    }
  }
  put("seed", cfg.seed);
  put("prior", cfg.prior);
  if (cfg.command == Command::Calibrate) {
    j["m"] = cfg.m.value_or(5);
    j["scenario"] = cfg.scenario;
    j["directions"] = cfg.directions;
    j["timings"] = cfg.timings;
    if (!cfg.accuracy_samples.empty()) j["accuracy-samples"] = cfg.accuracy_samples;
  }
  put("replications", cfg.replications);
  put("weight", cfg.weight);
  if (problem_cmd || cfg.command == Command::PinvStudy) {
    j["max-iters"] = cfg.policy.max_iters;
    j["residual-tol"] = cfg.policy.residual_tol;
    j["trace-tol"] = cfg.policy.trace_tol;
  }
  put("trials", cfg.trials);
  put("iterations", cfg.iterations);
  if (!cfg.out.empty()) j["out"] = cfg.out;
  j["format"] = cfg.format == OutputFormat::Json ? "json" : "csv";
  return j;
}

}  // namespace bcglab::cli
