#include "causalwr/study.hpp"

#include <cstdio>
#include <ostream>
#include <set>

#include "causalwr/errors.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

void StudyConfig::validate() const {
  if (estimators.empty()) throw ConfigError("study needs at least one estimator");
  if (n_grid.empty()) throw ConfigError("study needs a non-empty n grid");
  if (reps == 0) throw ConfigError("reps must be >= 1");
  std::set<std::string> names;
  for (const auto& e : estimators) {
    if (e.name.empty()) throw ConfigError("every estimator needs a name");
    if (!names.insert(e.name).second) throw ConfigError("duplicate estimator name '" + e.name + "'");
  }
  for (auto n : n_grid)
    if (n < 2) throw ConfigError("n grid entries must be >= 2");
  GenConfig g = generator;
  g.n = n_grid.front();
  g.validate();
  hierarchy.validate_for(generator.d);
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyResult result;
  result.oracle = oracle_taus(cfg.generator, cfg.hierarchy, cfg.oracle_draws);

  std::optional<PropensityModel> pi_oracle;
  std::shared_ptr<const DistRegModel> q_oracle;
  for (const auto& e : cfg.estimators) {
    if (e.oracle_propensity && !pi_oracle) pi_oracle = oracle_propensity(cfg.generator, e.pipeline.propensity ? e.pipeline.propensity->clip : Clip{});
    if (e.oracle_distreg && !q_oracle) q_oracle = oracle_distreg(cfg.generator);
  }

  const std::size_t m = cfg.estimators.size();
  const std::size_t cells = cfg.n_grid.size() * cfg.reps;
  result.rows.resize(cells * m);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t ni = cell / cfg.reps;
    const std::size_t rep = cell % cfg.reps;
    GenConfig g = cfg.generator;
    g.n = cfg.n_grid[ni];
    g.seed = derive_seed(cfg.seed, ni, rep);
    const SimulatedData sim = generate(g);
    for (std::size_t e = 0; e < m; ++e) {
      const StudyEstimator& est = cfg.estimators[e];
      PipelineConfig p = est.pipeline;
      p.hierarchy = cfg.hierarchy;
      p.seed = derive_seed(g.seed, 0x57D, e);
      if (est.oracle_propensity) p.propensity_override = pi_oracle;
      if (est.oracle_distreg) p.distreg_override = q_oracle;
      StudyRow& row = result.rows[cell * m + e];
      row.estimator = est.name;
      row.n = g.n;
      row.rep = rep;
      try {
        row.tau_hat = run_pipeline(sim.data, p).tau_hat;
      } catch (const Error& ex) {
        throw Error("estimator '" + est.name + "' failed at n=" + std::to_string(g.n) + ", rep=" +
                    std::to_string(rep) + ": " + ex.what());
      }
      row.oracle_tau_star = result.oracle.tau_star;
      row.oracle_tau_pop = result.oracle.tau_pop;
      row.seed = p.seed;
    }
  });
  return result;
}

void write_study_csv(std::ostream& out, const StudyResult& result) {
  out << "estimator,n,rep,tau_hat,oracle_tau_star,oracle_tau_pop,seed\n";
  char buf[256];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%llu", r.n, r.rep, r.tau_hat, r.oracle_tau_star,
                  r.oracle_tau_pop, static_cast<unsigned long long>(r.seed));
    out << r.estimator << ',' << buf << '\n';
  }
}

}  // namespace causalwr
