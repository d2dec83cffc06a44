#include "causalwr/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "causalwr/errors.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/simulate.hpp"
#include "causalwr/study.hpp"

namespace causalwr {

namespace {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double json_real(const Json& j) { return real_from_json(j, "report"); }

int fail(std::ostream& err, const std::exception& e, int code) {
  err << "error: " << e.what() << '\n';
  return code;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return fail(err, e, 2);
  } catch (const std::exception& e) {
    return fail(err, e, 1);
  }
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  require_known_keys(j,
                     {"input", "treatment", "outcomes", "covariates", "categorical", "hierarchy", "method", "k",
                      "metric", "strata", "propensity", "distreg", "train_fraction", "lambda_fraction", "ci", "seed",
                      "out"},
                     "config");
  RunConfig cfg;
  auto str = [&](const char* key) -> std::string {
    if (!j.contains(key)) return "";
    if (!j[key].is_string()) throw ConfigError(std::string("config.") + key + " must be a string");
    return j[key].get<std::string>();
  };
  auto strings = [&](const char* key) {
    try {
      return j.at(key).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config.") + key + " must be an array of column names");
    }
  };
  cfg.input = str("input");
  cfg.out = str("out");
  if (j.contains("treatment")) cfg.ingest.treatment = str("treatment");
  if (j.contains("outcomes"))
    cfg.ingest.outcomes = strings("outcomes");
  else if (j.contains("hierarchy"))
    cfg.ingest.outcomes = hierarchy_outcome_names(j["hierarchy"]);
  else
    throw ConfigError("config needs 'outcomes' or a 'hierarchy' naming outcome columns");
  if (j.contains("covariates")) cfg.ingest.covariates = strings("covariates");
  if (j.contains("categorical")) cfg.ingest.categorical = strings("categorical");
  cfg.pipeline = pipeline_from_json(j, cfg.ingest.outcomes);
  if (!j.contains("hierarchy"))
    cfg.pipeline.hierarchy = HierarchySpec::lexicographic(cfg.ingest.outcomes.size(), Direction::HigherBetter,
                                                          TiePolicy::HalfWin);
  if (j.contains("ci") && !j["ci"].is_null()) cfg.ci = ci_from_json(j["ci"]);
  return cfg;
}

Json run_config_to_json(const RunConfig& cfg) {
  Json j;
  j["input"] = cfg.input;
  j["treatment"] = cfg.ingest.treatment;
  j["outcomes"] = cfg.ingest.outcomes;
  if (cfg.ingest.covariates) j["covariates"] = *cfg.ingest.covariates;
  if (!cfg.ingest.categorical.empty()) j["categorical"] = cfg.ingest.categorical;
  j.update(pipeline_to_json(cfg.pipeline, cfg.ingest.outcomes));
  if (cfg.ci) j["ci"] = ci_to_json(*cfg.ci);
  if (!cfg.out.empty()) j["out"] = cfg.out;
  return j;
}

Json run_estimate(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ConfigError("no input file (set 'input' in the config or pass --input)");
  const Dataset d = ingest_csv(cfg.input, cfg.ingest);
  const EstimateReport r = cfg.ci ? run_pipeline(d, cfg.pipeline, *cfg.ci) : run_pipeline(d, cfg.pipeline);
  Json j = report_to_json(r);
  j["config"] = run_config_to_json(cfg);
  return j;
}

std::string summary_line(const Json& report) {
  std::ostringstream s;
  s << report.value("method", std::string("?"));
  if (report.contains("estimand") && report["estimand"].is_string())
    s << " [" << report["estimand"].get<std::string>() << "]";
  s << ": tau=" << format_real(json_real(report["tau_hat"])) << " WR=" << format_real(json_real(report["wr_hat"]));
  if (report.contains("wr_ratio_of_taus"))
    s << " WR(win/loss)=" << format_real(json_real(report["wr_ratio_of_taus"]));
  s << " NB=" << format_real(json_real(report["nb_hat"]));
  if (report.contains("ci")) {
    const Json& ci = report["ci"];
    s << " CI" << format_real(100 * ci["level"].get<double>()) << "%[" << ci["method"].get<std::string>()
      << "]=(" << format_real(json_real(ci["lo"])) << ", " << format_real(json_real(ci["hi"])) << ")";
    if (ci.contains("win_ratio"))
      s << " WR-CI=(" << format_real(json_real(ci["win_ratio"][0])) << ", " << format_real(json_real(ci["win_ratio"][1]))
        << ")";
  }
  s << " n=" << report["n"].get<std::size_t>() << " (" << report["n_control"].get<std::size_t>() << " control, "
    << report["n_treated"].get<std::size_t>() << " treated) seed=" << report["seed"].get<std::uint64_t>();
  return s.str();
}

int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!args.config) throw ConfigError("estimate needs --config (column roles and hierarchy)");
    const Json raw = read_json_file(*args.config);
    RunConfig cfg = run_config_from_json(raw);
    if (!cfg.input.empty() && std::filesystem::path(cfg.input).is_relative())
      cfg.input = (std::filesystem::path(*args.config).parent_path() / cfg.input).string();
    if (args.input) cfg.input = *args.input;
    if (args.method) cfg.pipeline.method = parse_method(*args.method);
    if (args.seed) {
      cfg.pipeline.seed = *args.seed;
      if (cfg.ci) cfg.ci->seed = *args.seed;
    }
    if (args.ci) {
      if (*args.ci == "none") {
        cfg.ci.reset();
      } else {
        CiSpec spec = cfg.ci.value_or(CiSpec{});
        if (!cfg.ci) spec.seed = cfg.pipeline.seed;
        if (*args.ci == "bootstrap")
          spec.method = CiMethod::BootstrapPercentile;
        else if (*args.ci == "gaussian")
          spec.method = CiMethod::GaussianCounts;
        else
          throw ConfigError("--ci must be bootstrap, gaussian or none, got '" + *args.ci + "'");
        cfg.ci = spec;
      }
    }
    if (args.boot) {
      if (!cfg.ci) cfg.ci = CiSpec{CiMethod::BootstrapPercentile, 0.95, 1000, cfg.pipeline.seed};
      cfg.ci->replicates = *args.boot;
    }
    if (args.out) cfg.out = *args.out;
    if (args.threads) set_thread_limit(*args.threads);
    cfg.pipeline.validate();
    if (cfg.ci) cfg.ci->validate();

    const Json report = run_estimate(cfg);
    if (!cfg.out.empty()) {
      std::ofstream f(cfg.out);
      if (!f) throw Error("cannot open output file '" + cfg.out + "'");
      f << report.dump(2) << '\n';
      if (!f) throw Error("failed writing '" + cfg.out + "'");
    } else {
      out << report.dump(2) << '\n';
    }
    out << summary_line(report) << '\n';
    return 0;
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!args.config) throw ConfigError("simulate needs --config (study definition)");
    Json raw = read_json_file(*args.config);
    if (args.seed && raw.is_object()) raw["seed"] = *args.seed;
    const StudyConfig cfg = study_from_json(raw);
    if (args.threads) set_thread_limit(*args.threads);
    const StudyResult result = run_study(cfg);
    if (args.out) {
      std::ofstream f(*args.out, std::ios::binary);
      if (!f) throw Error("cannot open output file '" + *args.out + "'");
      write_study_csv(f, result);
      if (!f) throw Error("failed writing '" + *args.out + "'");
      out << "wrote " << result.rows.size() << " rows to " << *args.out << " (oracle tau_star="
          << format_real(result.oracle.tau_star) << ", tau_pop=" << format_real(result.oracle.tau_pop) << ")\n";
    } else {
      write_study_csv(out, result);
    }
    return 0;
  });
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.sizes.empty()) throw ConfigError("bench needs at least one size");
    if (args.methods.empty()) throw ConfigError("bench needs at least one method");
    if (args.threads) set_thread_limit(*args.threads);
    std::vector<PipelineConfig> configs;
    for (const auto& name : args.methods) {
      PipelineConfig p;
      p.method = parse_method(name);
      p.hierarchy = HierarchySpec::lexicographic(3, Direction::HigherBetter, TiePolicy::Loss);
      p.seed = args.seed;
      ForestOptions forest;
      forest.trees = args.trees;
      if (p.method == Method::Stratified) p.strata = StrataConfig{"x1", 2};
      if (p.method == Method::Ipw) p.propensity = PropensityConfig{};
      if (p.method == Method::Distreg) p.distreg = DistRegConfig{NuisanceKind::Forest, forest, {}};
      if (p.method == Method::Aipw) {
        p.propensity = PropensityConfig{NuisanceKind::Forest, forest, {}, {}};
        p.distreg = DistRegConfig{NuisanceKind::Forest, forest, {}};
      }
      p.validate();
      configs.push_back(std::move(p));
    }
    std::ostringstream table;
    table << "method,n,seconds,tau_hat\n";
    for (auto n : args.sizes) {
      GenConfig g;
      g.n = n;
      g.seed = args.seed;
      const SimulatedData sim = generate(g);
      for (const auto& p : configs) {
        const auto start = std::chrono::steady_clock::now();
        const EstimateReport r = run_pipeline(sim.data, p);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char buf[128];
        std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f\n", n, seconds, r.tau_hat);
        table << to_string(p.method) << buf;
      }
    }
    if (args.out) {
      std::ofstream f(*args.out);
      if (!f) throw Error("cannot open output file '" + *args.out + "'");
      f << table.str();
    } else {
      out << table.str();
    }
    return 0;
  });
}

}  // namespace causalwr
