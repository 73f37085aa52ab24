#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcglab/calibration.hpp"
#include "bcglab/cli.hpp"
#include "bcglab/io.hpp"
#include "bcglab/pinv_study.hpp"
#include "bcglab/rng.hpp"
#include "bcglab/serialization.hpp"

using namespace bcglab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bcglab-test-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

void check_kind(ErrorKind kind, auto&& f) {
  try {
    f();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

template <typename T>
void check_json_round_trip(const T& value) {
  const json j = value;
  const T back = j.get<T>();
  CHECK(back == value);
  CHECK(json(back).dump() == j.dump());
}

struct Run {
  int status;
  std::string out, err;
};

Run run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cli::main(args, out, err);
  return {status, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("format_double is bit-faithful") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(-0.0) == "-0.0");
  CHECK(io::format_double(1.0) == "1");
  RandomStream rs(5, "fmt");
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rs.normal(), static_cast<int>(rs.next_u64() % 200) - 100);
    CHECK(std::bit_cast<std::uint64_t>(std::stod(io::format_double(v))) == std::bit_cast<std::uint64_t>(v));
  }
}

TEST_CASE("matrix and problem files round-trip bit-exactly") {
  TempDir dir;
  RandomStream rs(1, "files");
  Matrix m = rs.normal_matrix(4, 3);
  m(1, 1) = -0.0;
  m(2, 0) = 1e-310;
  io::write_matrix_file(dir.path / "m.json", m);
  const Matrix back = io::read_matrix_file(dir.path / "m.json");
  CHECK(back.rows() == 4);
  CHECK(back.cols() == 3);
  for (std::size_t i = 0; i < m.data().size(); ++i)
    CHECK(std::bit_cast<std::uint64_t>(back.data()[i]) == std::bit_cast<std::uint64_t>(m.data()[i]));
  CHECK(std::signbit(back(1, 1)));

  const LinearProblem p = random_spd_problem(5, 2);
  CHECK(io::parse_problem_file(io::problem_file_text(p)) == p);
  LinearProblem no_truth = p;
  no_truth.truth.reset();
  CHECK(io::parse_problem_file(io::problem_file_text(no_truth)) == no_truth);
  const Matrix sym = random_spd_matrix(4, 3);
  CHECK(io::parse_matrix_file(io::matrix_file_text(sym)) == sym);
}

TEST_CASE("malformed files are File errors naming the source") {
  TempDir dir;
  const fs::path missing = dir.path / "nope.json";
  try {
    io::read_matrix_file(missing);
    FAIL("expected File");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::File);
    CHECK(std::string(e.what()).find(missing.string()) != std::string::npos);
  }
  check_kind(ErrorKind::File, [] { io::parse_matrix_file("{not json", "x"); });
  check_kind(ErrorKind::File, [] {
    io::parse_matrix_file(R"({"format":"bcglab-matrix","rows":1,"cols":2,"symmetric":false,"order":"row-major","data":[1]})");
  });
  check_kind(ErrorKind::File, [] {
    io::parse_matrix_file(R"({"format":"bcglab-matrix","rows":1,"cols":1,"symmetric":false,"order":"row-major","data":[1],"extra":1})");
  });
  check_kind(ErrorKind::File, [] {
    io::parse_matrix_file(R"({"format":"bcglab-matrix","rows":2,"cols":2,"symmetric":true,"order":"row-major","data":[1,2,3,4]})");
  });
  check_kind(ErrorKind::File, [] { io::write_atomic("/nonexistent-dir/x/out.csv", "a"); });
}

TEST_CASE("CSV tables quote and check widths") {
  io::CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  t.add_row({io::cell(std::size_t{3}), io::cell("say \"hi\"")});
  CHECK(t.str() == "a,b\n1,\"x,y\"\n3,\"say \"\"hi\"\"\"\n");
  CHECK_THROWS_AS(t.add_row({"1"}), Error);
}

TEST_CASE("every report round-trips through JSON") {
  const LinearProblem p = random_spd_problem(6, 1);
  TerminationPolicy pol;
  pol.max_iters = 4;
  check_json_round_trip(bayescg_solve(p, PriorSpec::natural(), pol));
  check_json_round_trip(p);
  check_json_round_trip(PriorSpec::user(random_spd_matrix(3, 1), FactorKind::SymmetricSqrt));
  check_json_round_trip(run_oracle_study(p, PriorSpec::identity(), pol, {WeightTag::Euclidean, WeightTag::AWeighted}));
  PinvStudyConfig pc{6, 5, 2};
  pc.replications = 3;
  check_json_round_trip(pc);
  check_json_round_trip(run_pinv_study(pc));
  auto cc = scenario_config(CalibrationScenario::OverDispersed, 8, 2, 10, 3);
  check_json_round_trip(cc);
  check_json_round_trip(run_calibration(cc));
  check_json_round_trip(bayesian_accuracy_study(cc, {50, 100}, 2));
  check_json_round_trip(cost_factor_study(30, PriorSpec::user(Matrix::identity(30)), 1, 1, 5));
}

TEST_CASE("parse_config examples") {
  const auto c = cli::parse_config({"solve", "--d", "50", "--seed", "7", "--prior", "identity"});
  CHECK(c.command == cli::Command::Solve);
  CHECK(c.source == cli::ProblemSource::RandomSpd);
  CHECK(c.d == 50);
  CHECK(c.seed == 7);
  CHECK(c.prior == "identity");

  check_kind(ErrorKind::Usage, [] { cli::parse_config({"solve", "--prior", "identity", "--prior", "natural"}); });
  CHECK(cli::parse_config({"solve", "--d", "5", "--d", "5"}).d == 5);
  check_kind(ErrorKind::Usage, [] { cli::parse_config({"solve", "--scenario", "over-dispersed"}); });
  check_kind(ErrorKind::Usage, [] { cli::parse_config({"solve", "--d", "five"}); });
  check_kind(ErrorKind::Usage, [] { cli::parse_config({"frobnicate"}); });
  CHECK_THROWS_AS(cli::parse_config({"--help"}), cli::HelpRequested);

  const auto pinv = cli::parse_config({"pinv-study", "--c", "6", "--d", "5"});
  CHECK(pinv.source == cli::ProblemSource::RandomRank);
  CHECK(pinv.rank == 2);
  CHECK(pinv.replications == 100);
  CHECK(cli::parse_config({"calibrate"}).m == std::size_t{5});
  CHECK(cli::parse_config({"calibrate"}).replications == 2000);
  CHECK(cli::parse_config({"solve", "--m", "3"}).policy.max_iters == 3);
}

TEST_CASE("config file supplies defaults that flags override") {
  TempDir dir;
  const fs::path f = dir.path / "cfg.json";
  {
    std::ofstream(f) << R"({"command":"solve","d":12,"seed":3,"prior":"natural"})";
  }
  const auto c = cli::parse_config({"solve", "--config", f.string(), "--seed", "9"});
  CHECK(c.seed == 9);
  CHECK(c.d == 12);
  CHECK(c.prior == "natural");

  {
    std::ofstream(f) << R"({"command":"solve","dd":12})";
  }
  check_kind(ErrorKind::Usage, [&] { cli::parse_config({"solve", "--config", f.string()}); });
  check_kind(ErrorKind::File, [&] { cli::parse_config({"solve", "--config", (dir.path / "none").string()}); });
}

TEST_CASE("echoed config resolves to the same config") {
  TempDir dir;
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"solve", "--d", "7", "--prior", "inverse-a", "--m", "3"},
        {"calibrate", "--d", "9", "--m", "2", "--scenario", "wrong-mean", "--replications", "40"},
        {"oracle-compare", "--d", "5", "--weight", "a"},
        {"pinv-study", "--c", "7", "--d", "4", "--rank", "2", "--rhs", "in-range"},
        {"cost-study", "--d", "40", "--trials", "1"},
        {"invariants", "--d", "6", "--replications", "2", "--format", "json"}}) {
    const auto c = cli::parse_config(args);
    const fs::path f = dir.path / "echo.json";
    io::write_atomic(f, cli::config_to_json(c).dump());
    const auto back = cli::parse_config({std::string(cli::command_name(c.command)), "--config", f.string()});
    CHECK(back == c);
  }
}

TEST_CASE("resolve_prior") {
  CHECK(cli::resolve_prior("identity", 3).kind == PriorKind::Identity);
  const PriorSpec s = cli::resolve_prior("sparse-diag", 3);
  CHECK(s.kind == PriorKind::SparseDiagonal);
  CHECK(s.diagonal == Vector{1, 1, 1});
  check_kind(ErrorKind::Usage, [] { cli::resolve_prior("fancy", 3); });
  TempDir dir;
  io::write_matrix_file(dir.path / "p.json", random_spd_matrix(4, 1));
  CHECK(cli::resolve_prior("file:" + (dir.path / "p.json").string(), 4).kind == PriorKind::UserCovariance);
  check_kind(ErrorKind::InvalidPrior, [&] { cli::resolve_prior("file:" + (dir.path / "p.json").string(), 5); });
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code_for(ErrorKind::Usage) == cli::kExitUsage);
  CHECK(cli::exit_code_for(ErrorKind::InvalidConfig) == cli::kExitUsage);
  CHECK(cli::exit_code_for(ErrorKind::File) == cli::kExitInput);
  CHECK(cli::exit_code_for(ErrorKind::Breakdown) == cli::kExitNumerical);
  CHECK(cli::exit_code_for(ErrorKind::InvalidPrior) == cli::kExitNumerical);

  CHECK(run_cli({"solve", "--prior", "identity", "--prior", "natural"}).status == cli::kExitUsage);
  const Run missing = run_cli({"solve", "--problem-file", "/no/such/problem.json"});
  CHECK(missing.status == cli::kExitInput);
  CHECK(missing.err.find("/no/such/problem.json") != std::string::npos);
  CHECK(json::parse(missing.err.substr(missing.err.find("{\"error\""))).contains("error"));
  CHECK(run_cli({"solve", "--d", "4", "--out", "/no/such/dir/out.csv"}).status == cli::kExitWrite);
  CHECK(run_cli({"--help"}).status == cli::kExitOk);

  LinearProblem bad;
  bad.a = Matrix{{0, 1}, {1, 0}};
  bad.b = {1, 1};
  TempDir dir;
  io::write_atomic(dir.path / "p.json", io::problem_file_text(bad));
  CHECK(run_cli({"solve", "--problem-file", (dir.path / "p.json").string(), "--prior", "inverse-a"}).status ==
        cli::kExitNumerical);
}

TEST_CASE("invariants on the d = 20 corpus exit 0 with one row per invariant per m") {
  const Run r = run_cli({"invariants", "--d", "20", "--replications", "3"});
  CHECK(r.status == cli::kExitOk);
  CHECK(r.out.rfind("replication,iteration,prior,invariant,value,expected,tolerance,pass\n", 0) == 0);
  CHECK(r.out.find(",false\n") == std::string::npos);
  // Per problem and prior: 21 m values x (trace, rank, two oracle gaps,
  // monotone trace from m = 1) plus CG gaps under A^{-1} and two m = d rows.
  const std::size_t per_prior = 21 * 4 + 20 + 2;
  CHECK(line_count(r.out) == 1 + 3 * (3 * per_prior + 21));
}

TEST_CASE("CSV output goes to --out, the config echo to a sidecar") {
  TempDir dir;
  const fs::path out = dir.path / "solve.csv";
  const Run r = run_cli({"solve", "--d", "5", "--out", out.string()});
  CHECK(r.status == cli::kExitOk);
  const std::string body = io::read_file(out);
  CHECK(body.rfind("replication,iteration,residual_norm,", 0) == 0);
  CHECK(line_count(body) == 1 + 6);
  const json echo = json::parse(io::read_file(out.string() + ".config.json"));
  CHECK(echo["d"] == 5);
}

TEST_CASE("CSV headers per command") {
  const std::pair<std::vector<std::string>, std::string> cases[] = {
      {{"oracle-compare", "--d", "4"}, "replication,iteration,comparison,weight,basis,mean_diff,cov_frobenius_diff,w2,angle\n"},
      {{"pinv-study", "--c", "5", "--d", "4", "--replications", "2"}, "replication,iteration,residual_norm,distance_to_pinv\n"},
      {{"calibrate", "--d", "6", "--m", "2", "--replications", "20"},
       "replication,iteration,dof,z,covariance_trace,covered_50,covered_80,covered_90,covered_95\n"},
      {{"cost-study", "--d", "30", "--trials", "1", "--iterations", "3"},
       "replication,iteration,arm,bayescg_seconds,cg_seconds,wall_ratio,bayescg_flops,cg_flops,op_ratio\n"},
  };
  for (const auto& [args, header] : cases) {
    const Run r = run_cli(args);
    CHECK(r.status == cli::kExitOk);
    CHECK(r.out.substr(0, header.size()) == header);
  }
}

TEST_CASE("same config twice gives byte-identical output") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"solve", "--d", "9", "--seed", "4", "--prior", "natural"},
        {"solve", "--d", "9", "--format", "json"},
        {"calibrate", "--d", "8", "--m", "3", "--replications", "50", "--format", "json"},
        {"oracle-compare", "--d", "5", "--prior", "inverse-a"},
        {"pinv-study", "--c", "6", "--d", "5", "--replications", "5", "--format", "json"},
        {"invariants", "--d", "6", "--replications", "2"}}) {
    const Run a = run_cli(args);
    const Run b = run_cli(args);
    CHECK(a.status == cli::kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);
  }
}

}
