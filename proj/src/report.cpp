#include "causalwr/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causalwr/errors.hpp"

namespace causalwr {

namespace {

std::string tie_name(TiePolicy t) {
  switch (t) {
    case TiePolicy::HalfWin:
      return "half";
    case TiePolicy::Loss:
      return "loss";
    case TiePolicy::Drop:
      return "drop";
  }
  return "half";
}

TiePolicy parse_ties(const std::string& s) {
  if (s == "half" || s == "halfwin") return TiePolicy::HalfWin;
  if (s == "loss") return TiePolicy::Loss;
  if (s == "drop") return TiePolicy::Drop;
  throw ConfigError("hierarchy.ties must be half, loss or drop, got '" + s + "'");
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& context) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(context + "." + key + " is missing or has the wrong type");
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& context) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, context);
}

std::string metric_kind_name(MetricKind k) {
  switch (k) {
    case MetricKind::Euclidean:
      return "euclidean";
    case MetricKind::Mahalanobis:
      return "mahalanobis";
    case MetricKind::LatentEuclidean:
      return "famd";
  }
  return "euclidean";
}

MetricKind parse_metric_kind(const std::string& s) {
  if (s == "euclidean") return MetricKind::Euclidean;
  if (s == "mahalanobis") return MetricKind::Mahalanobis;
  if (s == "famd" || s == "latent") return MetricKind::LatentEuclidean;
  throw ConfigError("metric.kind must be euclidean, mahalanobis or famd, got '" + s + "'");
}

Json forest_to_json(const ForestOptions& f) {
  return Json{{"trees", f.trees},
              {"min_leaf", f.min_leaf},
              {"sample_fraction", f.sample_fraction},
              {"mtry", f.mtry},
              {"max_depth", f.max_depth},
              {"honesty", f.honesty}};
}

ForestOptions forest_from_json(const Json& j, const std::string& context) {
  ForestOptions f;
  f.trees = get_or<std::size_t>(j, "trees", f.trees, context);
  f.min_leaf = get_or<std::size_t>(j, "min_leaf", f.min_leaf, context);
  f.sample_fraction = get_or<double>(j, "sample_fraction", f.sample_fraction, context);
  f.mtry = get_or<std::size_t>(j, "mtry", f.mtry, context);
  f.max_depth = get_or<std::size_t>(j, "max_depth", f.max_depth, context);
  f.honesty = get_or<bool>(j, "honesty", f.honesty, context);
  return f;
}

Json vector_to_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const Json& j, const std::string& context) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(context + " must be an array of numbers");
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + " must be an array of rows");
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vector_from_json(j[r], context);
    if (r == 0) m.resize(static_cast<Eigen::Index>(j.size()), row.size());
    if (row.size() != m.cols()) throw ConfigError(context + " has ragged rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

}  // namespace

void require_known_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + " must be an object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + context);
}

Json real_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError(field + " must be a number");
}

Json report_to_json(const EstimateReport& r) {
  Json j;
  j["method"] = r.method;
  j["estimand"] = r.estimand ? Json(to_string(*r.estimand)) : Json(nullptr);
  j["tau_hat"] = real_to_json(r.tau_hat);
  j["wr_hat"] = real_to_json(r.wr_hat);
  j["nb_hat"] = real_to_json(r.nb_hat);
  if (r.tau_loss_hat) j["tau_loss_hat"] = real_to_json(*r.tau_loss_hat);
  if (r.wr_ratio_of_taus) j["wr_ratio_of_taus"] = real_to_json(*r.wr_ratio_of_taus);
  if (r.stats)
    j["stats"] = {{"wins", r.stats->wins},
                  {"losses", r.stats->losses},
                  {"dropped", r.stats->dropped},
                  {"pairs", r.stats->pairs},
                  {"ties", tie_name(r.stats->ties)}};
  if (r.lambda) j["lambda"] = *r.lambda;
  if (r.ci) {
    Json ci{{"lo", real_to_json(r.ci->lo)},
            {"hi", real_to_json(r.ci->hi)},
            {"level", r.ci->level},
            {"method", r.ci->method}};
    if (r.ci->replicates) ci["replicates"] = r.ci->replicates;
    ci["seed"] = r.ci->seed;
    if (r.ci->win_ratio)
      ci["win_ratio"] = Json::array({real_to_json(r.ci->win_ratio->first), real_to_json(r.ci->win_ratio->second)});
    if (r.ci->net_benefit)
      ci["net_benefit"] = Json::array({real_to_json(r.ci->net_benefit->first), real_to_json(r.ci->net_benefit->second)});
    j["ci"] = ci;
  }
  j["n"] = r.n;
  j["n_control"] = r.n_control;
  j["n_treated"] = r.n_treated;
  j["seed"] = r.seed;
  j["metadata"] = Json(r.metadata);
  j["warnings"] = r.warnings;
  return j;
}

Json hierarchy_to_json(const HierarchySpec& h, const std::vector<std::string>& outcome_names) {
  Json levels = Json::array();
  for (const auto& l : h.levels()) {
    Json level;
    if (l.outcome < outcome_names.size())
      level["outcome"] = outcome_names[l.outcome];
    else
      level["outcome"] = l.outcome;
    level["direction"] = l.direction == Direction::HigherBetter ? "higher" : "lower";
    if (l.tolerance != 0.0) level["tolerance"] = l.tolerance;
    levels.push_back(level);
  }
  return Json{{"levels", levels}, {"ties", tie_name(h.tie_policy())}};
}

std::vector<std::string> hierarchy_outcome_names(const Json& j) {
  std::vector<std::string> names;
  if (!j.contains("levels") || !j["levels"].is_array()) throw ConfigError("hierarchy.levels must be an array");
  for (const auto& level : j["levels"]) {
    if (!level.contains("outcome") || !level["outcome"].is_string())
      throw ConfigError("hierarchy levels must name their outcome column when 'outcomes' is not given");
    const auto name = level["outcome"].get<std::string>();
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  return names;
}

HierarchySpec hierarchy_from_json(const Json& j, const std::vector<std::string>& outcome_names) {
  require_known_keys(j, {"levels", "ties"}, "hierarchy");
  if (!j.contains("levels") || !j["levels"].is_array() || j["levels"].empty())
    throw ConfigError("hierarchy.levels must be a non-empty array");
  std::vector<HierarchyLevel> levels;
  for (std::size_t i = 0; i < j["levels"].size(); ++i) {
    const Json& l = j["levels"][i];
    const std::string ctx = "hierarchy.levels[" + std::to_string(i) + "]";
    require_known_keys(l, {"outcome", "direction", "tolerance"}, ctx);
    HierarchyLevel level;
    if (!l.contains("outcome")) throw ConfigError(ctx + ".outcome is missing");
    if (l["outcome"].is_string()) {
      const auto name = l["outcome"].get<std::string>();
      const auto it = std::find(outcome_names.begin(), outcome_names.end(), name);
      if (it == outcome_names.end()) throw ConfigError(ctx + ".outcome names unknown outcome column '" + name + "'");
      level.outcome = static_cast<std::size_t>(it - outcome_names.begin());
    } else {
      level.outcome = get<std::size_t>(l, "outcome", ctx);
    }
    const auto dir = get_or<std::string>(l, "direction", "higher", ctx);
    if (dir == "higher")
      level.direction = Direction::HigherBetter;
    else if (dir == "lower")
      level.direction = Direction::LowerBetter;
    else
      throw ConfigError(ctx + ".direction must be 'higher' or 'lower', got '" + dir + "'");
    level.tolerance = get_or<double>(l, "tolerance", 0.0, ctx);
    levels.push_back(level);
  }
  try {
    return HierarchySpec(std::move(levels), parse_ties(get_or<std::string>(j, "ties", "half", "hierarchy")));
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("hierarchy: ") + e.what());
  }
}

Json pipeline_to_json(const PipelineConfig& cfg, const std::vector<std::string>& outcome_names) {
  Json j;
  j["method"] = to_string(cfg.method);
  j["hierarchy"] = hierarchy_to_json(cfg.hierarchy, outcome_names);
  j["k"] = cfg.k;
  Json metric{{"kind", metric_kind_name(cfg.metric.kind)}};
  if (cfg.metric.kind == MetricKind::Mahalanobis) metric["ridge"] = cfg.metric.ridge;
  if (cfg.metric.kind == MetricKind::LatentEuclidean) metric["variance_kept"] = cfg.metric.variance_kept;
  if (!cfg.metric.weights.empty()) metric["weights"] = cfg.metric.weights;
  j["metric"] = metric;
  if (cfg.strata) j["strata"] = {{"column", cfg.strata->column}, {"quantiles", cfg.strata->quantiles}};
  if (cfg.propensity_override) {
    j["propensity"] = {{"kind", "supplied"}, {"label", cfg.propensity_override->label()}};
  } else if (cfg.propensity) {
    Json p = forest_to_json(cfg.propensity->forest);
    p["kind"] = to_string(cfg.propensity->kind);
    p["clip"] = Json::array({cfg.propensity->clip.lo, cfg.propensity->clip.hi});
    if (cfg.propensity->constant) p["constant"] = *cfg.propensity->constant;
    j["propensity"] = p;
  }
  if (cfg.distreg_override) {
    j["distreg"] = {{"kind", "supplied"}};
  } else if (cfg.distreg) {
    Json q = forest_to_json(cfg.distreg->forest);
    q["kind"] = to_string(cfg.distreg->kind);
    q["constraint"] = cfg.distreg->constraint == SharingConstraint::Free ? "free" : "shared";
    j["distreg"] = q;
  }
  j["train_fraction"] = cfg.train_fraction;
  j["lambda_fraction"] = cfg.lambda_fraction;
  j["seed"] = cfg.seed;
  return j;
}

PipelineConfig pipeline_from_json(const Json& j, const std::vector<std::string>& outcome_names) {
  PipelineConfig cfg;
  const std::string ctx = "config";
  if (j.contains("method")) cfg.method = parse_method(get<std::string>(j, "method", ctx));
  if (j.contains("hierarchy")) cfg.hierarchy = hierarchy_from_json(j["hierarchy"], outcome_names);
  cfg.k = get_or<std::size_t>(j, "k", cfg.k, ctx);
  if (j.contains("metric")) {
    const Json& m = j["metric"];
    require_known_keys(m, {"kind", "ridge", "variance_kept", "weights"}, "metric");
    cfg.metric.kind = parse_metric_kind(get_or<std::string>(m, "kind", "euclidean", "metric"));
    cfg.metric.ridge = get_or<double>(m, "ridge", cfg.metric.ridge, "metric");
    cfg.metric.variance_kept = get_or<double>(m, "variance_kept", cfg.metric.variance_kept, "metric");
    cfg.metric.weights = get_or<std::vector<double>>(m, "weights", {}, "metric");
  }
  if (j.contains("strata")) {
    const Json& s = j["strata"];
    require_known_keys(s, {"column", "quantiles"}, "strata");
    cfg.strata = StrataConfig{get<std::string>(s, "column", "strata"), get_or<std::size_t>(s, "quantiles", 2, "strata")};
  }
  const std::vector<std::string> forest_keys = {"kind", "trees", "min_leaf", "sample_fraction", "mtry", "max_depth", "honesty"};
  if (j.contains("propensity")) {
    const Json& p = j["propensity"];
    auto keys = forest_keys;
    keys.insert(keys.end(), {"clip", "constant"});
    require_known_keys(p, keys, "propensity");
    PropensityConfig pc;
    pc.kind = parse_nuisance(get<std::string>(p, "kind", "propensity"));
    pc.forest = forest_from_json(p, "propensity");
    if (p.contains("clip")) {
      const auto clip = get<std::vector<double>>(p, "clip", "propensity");
      if (clip.size() != 2) throw ConfigError("propensity.clip must be [lo, hi]");
      pc.clip = Clip{clip[0], clip[1]};
    }
    if (p.contains("constant")) pc.constant = get<double>(p, "constant", "propensity");
    cfg.propensity = pc;
  }
  if (j.contains("distreg")) {
    const Json& q = j["distreg"];
    auto keys = forest_keys;
    keys.push_back("constraint");
    require_known_keys(q, keys, "distreg");
    DistRegConfig dc;
    dc.kind = parse_nuisance(get<std::string>(q, "kind", "distreg"));
    dc.forest = forest_from_json(q, "distreg");
    const auto constraint = get_or<std::string>(q, "constraint", "free", "distreg");
    if (constraint == "free")
      dc.constraint = SharingConstraint::Free;
    else if (constraint == "shared")
      dc.constraint = SharingConstraint::FullySharedAcrossCoordinates;
    else
      throw ConfigError("distreg.constraint must be 'free' or 'shared', got '" + constraint + "'");
    cfg.distreg = dc;
  }
  cfg.train_fraction = get_or<double>(j, "train_fraction", cfg.train_fraction, ctx);
  cfg.lambda_fraction = get_or<double>(j, "lambda_fraction", cfg.lambda_fraction, ctx);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, ctx);
  return cfg;
}

Json ci_to_json(const CiSpec& ci) {
  return Json{{"method", ci.method == CiMethod::BootstrapPercentile ? "bootstrap" : "gaussian"},
              {"level", ci.level},
              {"replicates", ci.replicates},
              {"seed", ci.seed}};
}

CiSpec ci_from_json(const Json& j) {
  require_known_keys(j, {"method", "level", "replicates", "seed"}, "ci");
  CiSpec ci;
  const auto method = get_or<std::string>(j, "method", "bootstrap", "ci");
  if (method == "bootstrap")
    ci.method = CiMethod::BootstrapPercentile;
  else if (method == "gaussian")
    ci.method = CiMethod::GaussianCounts;
  else
    throw ConfigError("ci.method must be 'bootstrap' or 'gaussian', got '" + method + "'");
  ci.level = get_or<double>(j, "level", ci.level, "ci");
  ci.replicates = get_or<std::size_t>(j, "replicates", ci.replicates, "ci");
  ci.seed = get_or<std::uint64_t>(j, "seed", ci.seed, "ci");
  return ci;
}

Json generator_to_json(const GenConfig& cfg) {
  Json t{{"kind", to_string(cfg.treatment.kind)}};
  if (cfg.treatment.kind == TreatmentKind::Constant) t["pi"] = cfg.treatment.pi;
  if (cfg.treatment.v.size()) t["v"] = vector_to_json(cfg.treatment.v);
  if (!cfg.treatment.assignment.empty()) t["assignment"] = cfg.treatment.assignment;
  Json j{{"n", cfg.n}, {"p", cfg.p}, {"d", cfg.d}, {"treatment", t}, {"outcome", to_string(cfg.outcome)}};
  if (cfg.u0.size()) j["u0"] = vector_to_json(cfg.u0);
  if (cfg.u1.size()) j["u1"] = vector_to_json(cfg.u1);
  j["design_seed"] = cfg.design_seed;
  if (cfg.outcome == OutcomeMode::TwoGroup) {
    j["alpha"] = cfg.alpha;
    j["values"] = {{"y1_prime", cfg.values.y1_prime},
                   {"y0", cfg.values.y0},
                   {"y1", cfg.values.y1},
                   {"y0_prime", cfg.values.y0_prime}};
    j["deterministic_layout"] = cfg.deterministic_layout;
  }
  j["link"] = to_string(cfg.link);
  j["seed"] = cfg.seed;
  return j;
}

GenConfig generator_from_json(const Json& j) {
  const std::string ctx = "generator";
  require_known_keys(j,
                     {"n", "p", "d", "treatment", "outcome", "u0", "u1", "design_seed", "alpha", "values",
                      "deterministic_layout", "link", "seed"},
                     ctx);
  GenConfig cfg;
  cfg.n = get_or<std::size_t>(j, "n", cfg.n, ctx);
  cfg.p = get_or<std::size_t>(j, "p", cfg.p, ctx);
  cfg.d = get_or<std::size_t>(j, "d", cfg.d, ctx);
  if (j.contains("treatment")) {
    const Json& t = j["treatment"];
    require_known_keys(t, {"kind", "pi", "v", "assignment"}, "generator.treatment");
    const auto kind = get_or<std::string>(t, "kind", "constant", "generator.treatment");
    bool found = false;
    for (auto k : {TreatmentKind::Constant, TreatmentKind::LogitLinear, TreatmentKind::NonlinearProduct,
                   TreatmentKind::Alternating, TreatmentKind::Fixed})
      if (to_string(k) == kind) {
        cfg.treatment.kind = k;
        found = true;
      }
    if (!found)
      throw ConfigError("generator.treatment.kind must be constant, linear, product, alternating or fixed, got '" +
                        kind + "'");
    cfg.treatment.pi = get_or<double>(t, "pi", cfg.treatment.pi, "generator.treatment");
    if (t.contains("v")) cfg.treatment.v = vector_from_json(t["v"], "generator.treatment.v");
    cfg.treatment.assignment = get_or<std::vector<int>>(t, "assignment", {}, "generator.treatment");
  }
  if (j.contains("outcome")) {
    const auto mode = get<std::string>(j, "outcome", ctx);
    bool found = false;
    for (auto m : {OutcomeMode::Correlated, OutcomeMode::Uncorrelated, OutcomeMode::NonlinearQuadratic,
                   OutcomeMode::TwoGroup})
      if (to_string(m) == mode) {
        cfg.outcome = m;
        found = true;
      }
    if (!found)
      throw ConfigError("generator.outcome must be correlated, uncorrelated, quadratic or two-group, got '" + mode +
                        "'");
  }
  if (j.contains("u0")) cfg.u0 = vector_from_json(j["u0"], "generator.u0");
  if (j.contains("u1")) cfg.u1 = vector_from_json(j["u1"], "generator.u1");
  cfg.design_seed = get_or<std::uint64_t>(j, "design_seed", cfg.design_seed, ctx);
  cfg.alpha = get_or<double>(j, "alpha", cfg.alpha, ctx);
  if (j.contains("values")) {
    const Json& v = j["values"];
    require_known_keys(v, {"y1_prime", "y0", "y1", "y0_prime"}, "generator.values");
    cfg.values.y1_prime = get_or<double>(v, "y1_prime", cfg.values.y1_prime, "generator.values");
    cfg.values.y0 = get_or<double>(v, "y0", cfg.values.y0, "generator.values");
    cfg.values.y1 = get_or<double>(v, "y1", cfg.values.y1, "generator.values");
    cfg.values.y0_prime = get_or<double>(v, "y0_prime", cfg.values.y0_prime, "generator.values");
  }
  cfg.deterministic_layout = get_or<bool>(j, "deterministic_layout", cfg.deterministic_layout, ctx);
  const auto link = get_or<std::string>(j, "link", "normal-cdf", ctx);
  if (link == "normal-cdf")
    cfg.link = LinkFunction::NormalCdf;
  else if (link == "logistic")
    cfg.link = LinkFunction::Logistic;
  else
    throw ConfigError("generator.link must be 'normal-cdf' or 'logistic', got '" + link + "'");
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, ctx);
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("generator: ") + e.what());
  }
  return cfg;
}

namespace {

std::vector<std::string> default_outcome_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < d; ++k) names.push_back("y" + std::to_string(k + 1));
  return names;
}

}  // namespace

StudyConfig study_from_json(const Json& j) {
  require_known_keys(j, {"generator", "hierarchy", "estimators", "n", "reps", "seed", "oracle_draws"}, "study");
  StudyConfig cfg;
  if (!j.contains("generator")) throw ConfigError("study.generator is missing");
  cfg.generator = generator_from_json(j["generator"]);
  const auto names = default_outcome_names(cfg.generator.d);
  if (j.contains("hierarchy"))
    cfg.hierarchy = hierarchy_from_json(j["hierarchy"], names);
  else
    cfg.hierarchy = HierarchySpec::lexicographic(cfg.generator.d, Direction::HigherBetter, TiePolicy::Loss);
  if (!j.contains("estimators") || !j["estimators"].is_array()) throw ConfigError("study.estimators must be an array");
  for (std::size_t i = 0; i < j["estimators"].size(); ++i) {
    const Json& e = j["estimators"][i];
    const std::string ctx = "study.estimators[" + std::to_string(i) + "]";
    require_known_keys(e,
                       {"name", "method", "k", "metric", "strata", "propensity", "distreg", "train_fraction",
                        "lambda_fraction"},
                       ctx);
    StudyEstimator est;
    est.pipeline = pipeline_from_json(e, names);
    est.name = get_or<std::string>(e, "name", to_string(est.pipeline.method), ctx);
    est.oracle_propensity = est.pipeline.propensity && est.pipeline.propensity->kind == NuisanceKind::Oracle;
    est.oracle_distreg = est.pipeline.distreg && est.pipeline.distreg->kind == NuisanceKind::Oracle;
    cfg.estimators.push_back(std::move(est));
  }
  if (j.contains("n")) {
    if (j["n"].is_array())
      cfg.n_grid = get<std::vector<std::size_t>>(j, "n", "study");
    else
      cfg.n_grid = {get<std::size_t>(j, "n", "study")};
  } else {
    cfg.n_grid = {cfg.generator.n};
  }
  cfg.reps = get_or<std::size_t>(j, "reps", cfg.reps, "study");
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, "study");
  cfg.oracle_draws = get_or<std::size_t>(j, "oracle_draws", cfg.oracle_draws, "study");
  cfg.validate();
  return cfg;
}

Json study_to_json(const StudyConfig& cfg) {
  const auto names = default_outcome_names(cfg.generator.d);
  Json estimators = Json::array();
  for (const auto& e : cfg.estimators) {
    Json p = pipeline_to_json(e.pipeline, names);
    p.erase("hierarchy");
    p.erase("seed");
    Json out{{"name", e.name}};
    out.update(p);
    if (e.oracle_propensity) out["propensity"] = {{"kind", "oracle"}};
    if (e.oracle_distreg) out["distreg"] = {{"kind", "oracle"}};
    estimators.push_back(out);
  }
  return Json{{"generator", generator_to_json(cfg.generator)},
              {"hierarchy", hierarchy_to_json(cfg.hierarchy, names)},
              {"estimators", estimators},
              {"n", cfg.n_grid},
              {"reps", cfg.reps},
              {"seed", cfg.seed},
              {"oracle_draws", cfg.oracle_draws}};
}

Json famd_to_json(const FamdProjection& p) {
  Json schema = Json::array();
  for (const auto& c : p.schema) {
    Json col{{"name", c.name}, {"kind", c.kind == ColumnKind::Numeric ? "numeric" : "categorical"}};
    if (c.kind == ColumnKind::Categorical) col["levels"] = c.levels;
    schema.push_back(col);
  }
  return Json{{"schema", schema},
              {"means", p.means},
              {"sds", p.sds},
              {"level_frequencies", p.level_frequencies},
              {"axes", matrix_to_json(p.axes)},
              {"eigenvalues", vector_to_json(p.eigenvalues)},
              {"components", p.components},
              {"explained_variance", p.explained_variance},
              {"variance_kept", p.variance_kept}};
}

FamdProjection famd_from_json(const Json& j) {
  const std::string ctx = "famd";
  FamdProjection p;
  for (const auto& col : get<Json>(j, "schema", ctx)) {
    const auto name = get<std::string>(col, "name", ctx + ".schema");
    if (get<std::string>(col, "kind", ctx + ".schema") == "numeric")
      p.schema.push_back(CovariateColumn::numeric(name));
    else
      p.schema.push_back(
          CovariateColumn::categorical(name, get<std::vector<std::string>>(col, "levels", ctx + ".schema")));
  }
  p.means = get<std::vector<double>>(j, "means", ctx);
  p.sds = get<std::vector<double>>(j, "sds", ctx);
  p.level_frequencies = get<std::vector<std::vector<double>>>(j, "level_frequencies", ctx);
  p.axes = matrix_from_json(get<Json>(j, "axes", ctx), ctx + ".axes");
  p.eigenvalues = vector_from_json(get<Json>(j, "eigenvalues", ctx), ctx + ".eigenvalues");
  p.components = get<std::size_t>(j, "components", ctx);
  p.explained_variance = get<double>(j, "explained_variance", ctx);
  p.variance_kept = get<double>(j, "variance_kept", ctx);
  if (p.means.size() != p.schema.size() || p.sds.size() != p.schema.size() ||
      p.level_frequencies.size() != p.schema.size() || p.components > static_cast<std::size_t>(p.axes.cols()))
    throw ConfigError("famd projection fields have inconsistent sizes");
  return p;
}

Json metric_to_json(const Metric& m) {
  Json j{{"kind", metric_kind_name(m.kind())}};
  switch (m.kind()) {
    case MetricKind::Euclidean:
      j["weights"] = m.weights();
      break;
    case MetricKind::Mahalanobis:
      j["precision"] = matrix_to_json(m.precision());
      break;
    case MetricKind::LatentEuclidean:
      j["projection"] = famd_to_json(*m.projection());
      break;
  }
  return j;
}

Metric metric_from_json(const Json& j) {
  switch (parse_metric_kind(get<std::string>(j, "kind", "metric"))) {
    case MetricKind::Euclidean:
      return Metric::euclidean(get_or<std::vector<double>>(j, "weights", {}, "metric"));
    case MetricKind::Mahalanobis:
      return Metric::mahalanobis(matrix_from_json(get<Json>(j, "precision", "metric"), "metric.precision"));
    case MetricKind::LatentEuclidean:
      return Metric::latent(famd_from_json(get<Json>(j, "projection", "metric")));
  }
  throw ConfigError("unknown metric kind");
}

}  // namespace causalwr
