#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "causalwr/csv.hpp"
#include "causalwr/inference.hpp"
#include "causalwr/pipeline.hpp"
#include "causalwr/report.hpp"

namespace causalwr {

// Everything needed to reproduce one estimation run.
struct RunConfig {
  std::string input;
  IngestConfig ingest;
  PipelineConfig pipeline;
  std::optional<CiSpec> ci;
  std::string out;
};

// Keys: input, treatment, outcomes, covariates, categorical, hierarchy,
// method, k, metric, strata, propensity, distreg, train_fraction,
// lambda_fraction, ci, seed, out. Outcome columns default to the ones named
// by the hierarchy levels.
RunConfig run_config_from_json(const Json& j);
Json run_config_to_json(const RunConfig& cfg);

// Command-line overrides; unset fields keep the config file values.
struct EstimateArgs {
  std::optional<std::string> input;
  std::optional<std::string> config;
  std::optional<std::string> method;
  std::optional<std::string> ci;  // bootstrap | gaussian | none
  std::optional<std::size_t> boot;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
};

struct SimulateArgs {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
};

struct BenchArgs {
  std::vector<std::size_t> sizes;
  std::vector<std::string> methods = {"complete", "knn", "ipw", "distreg", "aipw"};
  std::size_t trees = 500;
  std::uint64_t seed = 0;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
};

// Runs ingestion, pipeline and interval; the returned record embeds the
// resolved config and seeds.
Json run_estimate(const RunConfig& cfg);

// One-line human summary of a report record.
std::string summary_line(const Json& report);

// Each command returns a process exit status: 0 on success, 2 for
// configuration errors, 1 for any other failure (message on `err`).
int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);

}  // namespace causalwr
