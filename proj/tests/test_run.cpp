#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "crbkit/io.hpp"
#include "crbkit/run.hpp"

using namespace crbkit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "crbkit_test_run" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_fim(const fs::path& dir, const Matrix& m) {
  const fs::path p = dir / "fim_in.matx";
  io::write_matx(p, m);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// key,value CSV -> map.
std::map<std::string, std::string> read_kv(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == "key,value") continue;
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

RunConfig analyze_diag20(const fs::path& dir) {
  RunConfig c;
  c.command = "analyze";
  c.input = write_fim(dir, Matrix((Matrix(2, 2) << 2, 0, 0, 0).finished()));
  c.theta = (Vector(2) << 3, 4).finished();
  c.out = dir / "out";
  return c;
}

}  // namespace

TEST_CASE("analyze on diag(2, 0)") {
  const fs::path dir = scratch("analyze");
  const RunResult r = run_command(analyze_diag20(dir));
  REQUIRE_MESSAGE(r.exit_code == kExitOk, r.summary);
  const auto kv = read_kv(dir / "out" / "summary.csv");
  CHECK(kv.at("rank") == "1");
  CHECK(kv.at("nullity") == "1");
  CHECK(std::stod(kv.at("trace_pinv")) == 0.5);
  CHECK(kv.at("is_minimum_constraint") == "true");
  CHECK(std::abs(std::stod(kv.at("trace_margin"))) < 1e-15);

  const ConstraintSpec c = io::read_constraint(dir / "out" / "constraint.txt");
  CHECK(std::abs(c.f_jac(0, 1)) == 1.0);
  CHECK(c.f_jac(0, 0) == 0.0);
  CHECK((c.f_jac * (Vector(2) << 3, 4).finished() + *c.offset).norm() < 1e-15);
  CHECK(slurp(dir / "out" / "summary.csv").rfind("# crb-kit v1\n", 0) == 0);

  // The manifest replays the run.
  RunConfig replay;
  replay.load(dir / "out" / "manifest.txt");
  CHECK(replay.command == "analyze");
  CHECK(replay.theta->isApprox((Vector(2) << 3, 4).finished()));
}

TEST_CASE("reruns produce byte-identical reports") {
  const fs::path dir = scratch("rerun");
  RunConfig c;
  c.command = "analyze";
  c.model = "blind_channel";
  c.s_len = 2;
  c.h_len = 2;
  c.seed = 11;
  c.samples = 2000;
  c.workers = 1;
  c.out = dir / "a";
  REQUIRE(run_command(c).exit_code == kExitOk);
  c.out = dir / "b";
  c.workers = 4;
  REQUIRE(run_command(c).exit_code == kExitOk);
  for (const char* f : {"summary.csv", "eigenvalues.csv", "fim_mc.matx", "constraint.txt"}) {
    CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  }
}

TEST_CASE("analyze on a full-rank FIM reports that no constraint is needed") {
  const fs::path dir = scratch("fullrank");
  RunConfig c;
  c.command = "analyze";
  c.input = write_fim(dir, Matrix((Matrix(2, 2) << 2, 1, 1, 2).finished()));
  c.out = dir / "out";
  const RunResult r = run_command(c);
  REQUIRE(r.exit_code == kExitOk);
  CHECK(read_kv(dir / "out" / "summary.csv").at("note") == "no constraint needed");
  CHECK_FALSE(fs::exists(dir / "out" / "constraint.txt"));
}

TEST_CASE("blind channel analysis finds exactly the scalar ambiguity") {
  const fs::path dir = scratch("blind");
  for (Eigen::Index len : {2, 3, 4}) {
    RunConfig c;
    c.command = "analyze";
    c.model = "blind_channel";
    c.s_len = len;
    c.h_len = len;
    c.seed = static_cast<std::uint64_t>(len);
    c.out = dir / std::to_string(len);
    REQUIRE(run_command(c).exit_code == kExitOk);
    const auto kv = read_kv(c.out / "summary.csv");
    CHECK(kv.at("nullity") == "1");
    CHECK(std::stod(kv.at("ambiguity_residual_rel")) <= 1e-8);
  }
}

TEST_CASE("experiment on diag(2, 0)") {
  const fs::path dir = scratch("experiment");
  RunConfig c = analyze_diag20(dir);
  c.command = "experiment";
  c.count = 1000;
  c.seed = 4;
  const RunResult r = run_command(c);
  REQUIRE_MESSAGE(r.exit_code == kExitOk, r.summary);
  const auto kv = read_kv(dir / "out" / "experiment_summary.csv");
  CHECK(kv.at("count") == "1000");
  CHECK(std::stod(kv.at("min_trace")) >= 0.5 - 1e-9);
  CHECK(std::stod(kv.at("min_margin")) >= -1e-9);

  c.force_optimal = true;
  c.count = 1;
  c.out = dir / "opt";
  REQUIRE(run_command(c).exit_code == kExitOk);
  CHECK(std::abs(std::stod(read_kv(dir / "opt" / "experiment_summary.csv").at("min_margin"))) <
        1e-15);
}

TEST_CASE("certify passes and writes one row per certificate") {
  const fs::path dir = scratch("certify");
  RunConfig c;
  c.command = "certify";
  c.seed = 1;
  c.count = 5;
  c.out = dir / "out";
  const RunResult r = run_command(c);
  REQUIRE_MESSAGE(r.exit_code == kExitOk, r.summary);
  std::ifstream in(dir / "out" / "certificates.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "# crb-kit v1");
  std::getline(in, line);
  CHECK(line == "theorem_id,passed,n_cases,worst_margin,statistic,statistic_value");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.find(",true,") != std::string::npos);
    ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  SUBCASE("missing input file") {
    RunConfig c;
    c.command = "analyze";
    c.input = dir / "nope.matx";
    c.out = dir / "o";
    CHECK(run_command(c).exit_code == kExitInvalidInput);
  }
  SUBCASE("indefinite FIM") {
    RunConfig c;
    c.command = "analyze";
    c.input = write_fim(dir, Matrix((Matrix(2, 2) << 1, 0, 0, -1).finished()));
    c.out = dir / "o";
    const RunResult r = run_command(c);
    CHECK(r.exit_code == kExitInvalidInput);
    CHECK(r.summary.find("positive semidefinite") != std::string::npos);
  }
  SUBCASE("experiment on a full-rank FIM") {
    RunConfig c;
    c.command = "experiment";
    c.input = write_fim(dir, Matrix::Identity(3, 3));
    c.out = dir / "o";
    CHECK(run_command(c).exit_code == kExitInvalidInput);
  }
  SUBCASE("numerical failure names the stage") {
    RunConfig c;
    c.command = "analyze";
    c.input = write_fim(dir, Matrix::Constant(2, 2, 1e308));
    c.out = dir / "o";
    const RunResult r = run_command(c);
    CHECK(r.exit_code == kExitNumerical);
    CHECK(r.summary.find("stage") != std::string::npos);
  }
  SUBCASE("bad config values") {
    RunConfig c;
    RunConfig neg;
    neg.command = "certify";
    neg.set("rank_tol", "-1");
    CHECK_THROWS_AS(neg.validate(), Error);
    CHECK(run_command(neg).exit_code == kExitInvalidInput);
    CHECK_THROWS_AS(c.set("no_such_key", "1"), Error);
    CHECK_THROWS_AS(c.set("count", "abc"), Error);
    c.command = "analyze";
    c.out = dir / "o";
    CHECK(run_command(c).exit_code == kExitInvalidInput);  // neither input nor model
    c.command = "bogus";
    CHECK(run_command(c).exit_code == kExitInvalidInput);
  }
}
