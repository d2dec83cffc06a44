#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "causalwr/model.hpp"
#include "causalwr/pipeline.hpp"
#include "causalwr/simulate.hpp"

namespace causalwr {

// One entry of the estimator menu. Oracle flags replace the configured
// nuisance by the generator's true π or conditional laws.
struct StudyEstimator {
  std::string name;
  PipelineConfig pipeline;
  bool oracle_propensity = false;
  bool oracle_distreg = false;
};

struct StudyConfig {
  GenConfig generator;
  HierarchySpec hierarchy = HierarchySpec::single(Direction::HigherBetter, TiePolicy::HalfWin);
  std::vector<StudyEstimator> estimators;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  std::size_t oracle_draws = 1000000;

  void validate() const;
};

struct StudyRow {
  std::string estimator;
  std::size_t n = 0;
  std::size_t rep = 0;
  double tau_hat = 0.0;
  double oracle_tau_star = 0.0;
  double oracle_tau_pop = 0.0;
  std::uint64_t seed = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;  // ordered by (n, rep, menu position)
  OracleResult oracle;
};

// Every (n, rep) cell draws one dataset and runs each estimator on it. Cell
// seeds derive from (seed, n index, rep), so the table does not depend on
// the number of worker threads.
StudyResult run_study(const StudyConfig& cfg);

void write_study_csv(std::ostream& out, const StudyResult& result);

}  // namespace causalwr
