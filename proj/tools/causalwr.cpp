#include <iostream>

#include <CLI11.hpp>

#include "causalwr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Win-ratio estimation for prioritised outcomes"};
  app.require_subcommand(1);

  causalwr::EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate tau, WR and NB on a CSV dataset");
  estimate->add_option("--config", est.config, "JSON run configuration")->required();
  estimate->add_option("--input", est.input, "CSV input (overrides the config)");
  estimate->add_option("--method", est.method, "complete|stratified|knn|optimal|ipw|distreg|aipw");
  estimate->add_option("--ci", est.ci, "bootstrap|gaussian|none");
  estimate->add_option("--boot", est.boot, "bootstrap replicates");
  estimate->add_option("--seed", est.seed, "master seed");
  estimate->add_option("--threads", est.threads, "worker threads");
  estimate->add_option("--out", est.out, "report path (JSON); stdout when omitted");

  causalwr::SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo study and write the results table");
  simulate->add_option("--config", sim.config, "JSON study configuration")->required();
  simulate->add_option("--seed", sim.seed, "master seed (overrides the config)");
  simulate->add_option("--threads", sim.threads, "worker threads");
  simulate->add_option("--out", sim.out, "results CSV; stdout when omitted");

  causalwr::BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time each estimator on simulated data");
  bench_cmd->add_option("--sizes", bench.sizes, "sample sizes")->required()->delimiter(',');
  bench_cmd->add_option("--methods", bench.methods, "methods to time")->delimiter(',');
  bench_cmd->add_option("--trees", bench.trees, "trees per forest");
  bench_cmd->add_option("--seed", bench.seed, "master seed");
  bench_cmd->add_option("--threads", bench.threads, "worker threads");
  bench_cmd->add_option("--out", bench.out, "timing CSV; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (estimate->parsed()) return causalwr::cmd_estimate(est, std::cout, std::cerr);
  if (simulate->parsed()) return causalwr::cmd_simulate(sim, std::cout, std::cerr);
  return causalwr::cmd_bench(bench, std::cout, std::cerr);
}
