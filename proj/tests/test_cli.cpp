#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "causalwr/cli.hpp"
#include "causalwr/errors.hpp"
#include "causalwr/simulate.hpp"
#include "helpers.hpp"

using namespace causalwr;
namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

fs::path data_dir() { return env_or("CAUSALWR_DATA", "data"); }

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "causalwr_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Runs the command-line tool and returns its exit status.
int run_tool(const std::string& args, const fs::path& log) {
  const std::string cmd = env_or("CAUSALWR_TOOL", "causalwr") + " " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

IngestConfig example_roles() {
  IngestConfig cfg;
  cfg.treatment = "T";
  cfg.outcomes = {"y"};
  return cfg;
}

}  // namespace

TEST_CASE("ingest the Example 1 table") {
  const Dataset d = ingest_csv((data_dir() / "example1.csv").string(), example_roles());
  const Dataset ref = testing::example_one_table();
  CHECK(d.n() == 6);
  CHECK(d.n_control() == 3);
  CHECK(d.n_treated() == 3);
  CHECK(d.outcomes() == ref.outcomes());
  CHECK(d.covariates() == ref.covariates());
}

TEST_CASE("ingest rejects malformed tables with named errors") {
  const auto read = [](const std::string& text, IngestConfig cfg) {
    std::istringstream in(text);
    return read_csv(in, cfg);
  };
  const IngestConfig roles = example_roles();
  try {
    read("x,T,y\n1,0,2\n2,1,NA\n3,0,1\n,1,2\n", roles);
    FAIL("missing cells were accepted");
  } catch (const InvalidInput& e) {
    const std::string what = e.what();
    CHECK(what.find("line 3") != std::string::npos);
    CHECK(what.find("line 5") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(read("x,T,y\n1,0,2\n2,2,1\n", roles), doctest::Contains("T"), InvalidInput);
  CHECK_THROWS_WITH_AS(read("x,T,y\n1,0,2\n2,1,high\n", roles), doctest::Contains("y"), InvalidInput);
  IngestConfig missing = roles;
  missing.outcomes = {"z"};
  CHECK_THROWS_WITH_AS(read("x,T,y\n1,0,2\n2,1,1\n", missing), doctest::Contains("'z'"), InvalidInput);
  const Dataset quoted = read("\"site, name\",T,y\n\"a, b\",0,1\nc,1,2\n", roles);
  CHECK(quoted.schema().front().kind == ColumnKind::Categorical);
}

TEST_CASE("CSV write then ingest round-trips 6000 rows") {
  GenConfig g;
  g.n = 6000;
  g.seed = 4;
  const Dataset d = generate(g).data;
  const fs::path path = scratch() / "roundtrip.csv";
  write_csv(path.string(), d);
  IngestConfig roles;
  roles.treatment = d.treatment_name();
  roles.outcomes = d.outcome_names();
  const Dataset back = ingest_csv(path.string(), roles);
  CHECK(back.n() == 6000);
  CHECK(back.treatment() == d.treatment());
  CHECK(back.covariates() == d.covariates());
  CHECK(back.outcomes() == d.outcomes());
}

TEST_CASE("estimate command on Example 1") {
  EstimateArgs args;
  args.config = (data_dir() / "example1.json").string();
  std::ostringstream out, err;
  REQUIRE(cmd_estimate(args, out, err) == 0);
  const std::string text = out.str();
  const Json report = Json::parse(text.substr(0, text.rfind("}\n") + 1));
  CHECK(report["tau_hat"].get<double>() == 4.0 / 9.0);
  CHECK(report["config"]["seed"].get<std::uint64_t>() == 1);
  CHECK(text.find("tau=0.444444") != std::string::npos);

  args.method = "knn";
  args.out = (scratch() / "knn.json").string();
  std::ostringstream out2;
  REQUIRE(cmd_estimate(args, out2, err) == 0);
  const Json knn = Json::parse(slurp(*args.out));
  CHECK(knn["tau_hat"].get<double>() == 2.0 / 3.0);
  CHECK(knn["wr_ratio_of_taus"].get<double>() == 2.0);

  // The embedded config reproduces the run.
  const fs::path replay = scratch() / "replay.json";
  Json cfg = knn["config"];
  cfg["input"] = fs::absolute(data_dir() / "example1.csv").string();
  write_file(replay, cfg.dump());
  EstimateArgs again;
  again.config = replay.string();
  again.out = (scratch() / "knn2.json").string();
  REQUIRE(cmd_estimate(again, out2, err) == 0);
  CHECK(Json::parse(slurp(*again.out))["tau_hat"] == knn["tau_hat"]);
}

TEST_CASE("estimate command configuration errors exit with status 2") {
  EstimateArgs args;
  args.config = (data_dir() / "example1.json").string();
  args.method = "aipw";
  std::ostringstream out, err;
  CHECK(cmd_estimate(args, out, err) == 2);
  CHECK(err.str().find("propensity") != std::string::npos);
  args.method = "nonsense";
  CHECK(cmd_estimate(args, out, err) == 2);
  EstimateArgs none;
  CHECK(cmd_estimate(none, out, err) == 2);
  EstimateArgs bad_input;
  bad_input.config = args.config;
  bad_input.input = (scratch() / "does_not_exist.csv").string();
  CHECK(cmd_estimate(bad_input, out, err) == 1);
}

TEST_CASE("simulate command") {
  SimulateArgs args;
  args.config = (data_dir() / "example1_study.json").string();
  std::ostringstream out, err;
  REQUIRE(cmd_simulate(args, out, err) == 0);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "estimator,n,rep,tau_hat,oracle_tau_star,oracle_tau_pop,seed");
  int complete = 0, nn = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("complete,6,", 0) == 0 && line.find(",0.44444444444444442,") != std::string::npos) ++complete;
    if (line.rfind("nn,6,", 0) == 0 && line.find(",0.66666666666666663,") != std::string::npos) ++nn;
  }
  CHECK(complete == 10);
  CHECK(nn == 10);

  const fs::path zero = scratch() / "zero_reps.json";
  Json cfg = Json::parse(slurp(*args.config));
  cfg["reps"] = 0;
  write_file(zero, cfg.dump());
  SimulateArgs bad;
  bad.config = zero.string();
  CHECK(cmd_simulate(bad, out, err) == 2);
}

TEST_CASE("command-line tool end to end") {
  const fs::path dir = scratch();
  const std::string study = "\"" + (data_dir() / "example1_study.json").string() + "\"";
  REQUIRE(run_tool("simulate --config " + study + " --seed 3 --out \"" + (dir / "a.csv").string() + "\"",
                   dir / "log_a.txt") == 0);
  REQUIRE(run_tool("simulate --config " + study + " --seed 3 --threads 2 --out \"" + (dir / "b.csv").string() + "\"",
                   dir / "log_b.txt") == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK_FALSE(slurp(dir / "a.csv").empty());

  const std::string config = "\"" + (data_dir() / "example1.json").string() + "\"";
  CHECK(run_tool("estimate --config " + config + " --method knn --out \"" + (dir / "r.json").string() + "\"",
                 dir / "log_r.txt") == 0);
  CHECK(Json::parse(slurp(dir / "r.json"))["tau_hat"].get<double>() == 2.0 / 3.0);
  CHECK(slurp(dir / "log_r.txt").find("WR=2") != std::string::npos);
  CHECK(run_tool("estimate --config " + config + " --method aipw", dir / "log_e.txt") == 2);
  CHECK(slurp(dir / "log_e.txt").find("error:") != std::string::npos);

  CHECK(run_tool("bench --sizes 200 --methods complete,knn --out \"" + (dir / "bench.csv").string() + "\"",
                 dir / "log_bench.txt") == 0);
  const std::string bench = slurp(dir / "bench.csv");
  CHECK(bench.rfind("method,n,seconds,tau_hat\n", 0) == 0);
  CHECK(bench.find("complete,200,") != std::string::npos);
  CHECK(bench.find("knn,200,") != std::string::npos);
}

TEST_CASE("bench command") {
  BenchArgs args;
  std::ostringstream out, err;
  CHECK(cmd_bench(args, out, err) == 2);
  args.sizes = {6000};
  args.methods = {"complete"};
  REQUIRE(cmd_bench(args, out, err) == 0);
  CHECK(out.str().find("complete,6000,") != std::string::npos);
  args.methods = {"bogus"};
  CHECK(cmd_bench(args, out, err) == 2);
}

TEST_CASE("run configuration round trip") {
  RunConfig cfg;
  cfg.input = "in.csv";
  cfg.ingest.outcomes = {"death", "days"};
  cfg.ingest.categorical = {"site"};
  cfg.pipeline.method = Method::Aipw;
  cfg.pipeline.hierarchy = HierarchySpec({{0, Direction::LowerBetter}, {1, Direction::HigherBetter, 2.0}},
                                         TiePolicy::Drop);
  cfg.pipeline.propensity = PropensityConfig{NuisanceKind::Forest, {}, Clip{0.05, 0.95}, {}};
  cfg.pipeline.distreg = DistRegConfig{NuisanceKind::Logistic, {}, SharingConstraint::FullySharedAcrossCoordinates};
  cfg.pipeline.seed = 77;
  cfg.ci = CiSpec{CiMethod::BootstrapPercentile, 0.9, 250, 77};
  const Json j = run_config_to_json(cfg);
  const RunConfig back = run_config_from_json(j);
  CHECK(run_config_to_json(back) == j);
  CHECK(back.pipeline.hierarchy.levels().size() == 2);
  CHECK(back.pipeline.hierarchy.levels()[1].tolerance == 2.0);
  CHECK(back.pipeline.propensity->clip.lo == 0.05);
  CHECK(back.ci->replicates == 250);

  Json unknown = j;
  unknown["methd"] = "knn";
  CHECK_THROWS_WITH_AS(run_config_from_json(unknown), doctest::Contains("methd"), ConfigError);
}
