#pragma once

// bayescg-lab command line: configuration resolution, dispatch to the
// library modules and deterministic serialization of their reports.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcglab/errors.hpp"
#include "bcglab/serialization.hpp"

namespace bcglab::cli {

enum class Command { Solve, Calibrate, OracleCompare, PinvStudy, CostStudy, Invariants };
enum class ProblemSource { RandomSpd, RandomRank, File };
enum class OutputFormat { Csv, Json };

std::string_view command_name(Command c) noexcept;
std::optional<Command> parse_command(std::string_view name) noexcept;

/// Exit statuses; also listed in --help.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,       // bad flags, config file keys or values
  kExitInput = 3,       // unreadable or malformed input file
  kExitNumerical = 4,   // a module rejected the problem or broke down
  kExitWrite = 5,       // output could not be written
  kExitViolation = 6,   // invariants: at least one check failed
};

int exit_code_for(ErrorKind kind) noexcept;

/// Fully resolved experiment. Only the fields the command uses are echoed.
struct ExperimentConfig {
  Command command = Command::Solve;
  ProblemSource source = ProblemSource::RandomSpd;
  std::size_t d = 20;
  std::size_t c = 20;
  std::size_t rank = 1;
  std::uint64_t seed = 0;
  std::string problem_file;
  double condition = 10.0;
  std::string prior = "identity";  // identity | natural | inverse-a | sparse-diag | file:PATH
  std::optional<std::size_t> m;  // calibrate only; elsewhere --m sets policy.max_iters
  std::size_t replications = 0;
  std::string weight = "all";
  std::string rhs = "generic";
  std::string scenario = "well-specified";
  std::string directions = "adaptive";
  std::vector<std::size_t> accuracy_samples;
  std::size_t trials = 5;
  std::size_t iterations = 50;
  bool timings = false;
  TerminationPolicy policy;
  std::string out;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;

  bool operator==(const ExperimentConfig&) const = default;
};

/// The config as a JSON object accepted back by --config.
json config_to_json(const ExperimentConfig& config);

struct HelpRequested {
  std::string text;
};

/// Parses argv-style arguments (without the program name). A --config FILE
/// supplies defaults that flags override; unknown keys, flags the command
/// does not use and conflicting repeats are Error{Usage} naming the flag.
/// Throws HelpRequested for --help.
ExperimentConfig parse_config(const std::vector<std::string>& args);

std::string help_text();

/// Prior named by the config, resolved against a problem dimension.
PriorSpec resolve_prior(const std::string& name, std::size_t dim);

LinearProblem build_problem(const ExperimentConfig& config);

struct RunOutput {
  std::string body;       // written to --out or stdout
  std::string sidecar;    // config echo for CSV output; empty for JSON
  int status = kExitOk;
};

/// Runs the experiment and renders its output without touching the
/// filesystem (except reading inputs). Module errors propagate as Error.
RunOutput run_experiment(const ExperimentConfig& config);

/// run_experiment plus atomic writes and error mapping. Errors are written
/// to err as one JSON record.
int run_and_serialize(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Entry point used by the bayescg-lab executable.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct InvariantRow {
  std::size_t problem = 0;
  std::size_t m = 0;
  std::string prior;
  std::string invariant;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  bool operator==(const InvariantRow&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(InvariantRow, problem, m, prior, invariant, value, expected,
                                   tolerance, pass)

/// The invariant corpus: `problems` random SPD systems of size d under the
/// identity, A^{-1} and natural priors; one row per invariant per m.
std::vector<InvariantRow> run_invariants(std::size_t d, std::size_t problems, std::uint64_t seed,
                                         double condition);

}  // namespace bcglab::cli
