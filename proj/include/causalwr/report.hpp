#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "causalwr/estimators.hpp"
#include "causalwr/famd.hpp"
#include "causalwr/inference.hpp"
#include "causalwr/pairing.hpp"
#include "causalwr/pipeline.hpp"
#include "causalwr/simulate.hpp"
#include "causalwr/study.hpp"

namespace causalwr {

using Json = nlohmann::ordered_json;

// Non-finite reals are written as the strings "inf", "-inf", "nan".
Json real_to_json(double v);
double real_from_json(const Json& j, const std::string& field);

Json report_to_json(const EstimateReport& r);

// Levels refer to outcomes by column name when names are given, by index
// otherwise. Directions: "higher" / "lower"; ties: "half", "loss", "drop".
Json hierarchy_to_json(const HierarchySpec& h, const std::vector<std::string>& outcome_names = {});
HierarchySpec hierarchy_from_json(const Json& j, const std::vector<std::string>& outcome_names = {});
// Outcome column names referenced by a hierarchy config, in level order.
std::vector<std::string> hierarchy_outcome_names(const Json& j);

Json pipeline_to_json(const PipelineConfig& cfg, const std::vector<std::string>& outcome_names = {});
// Reads the pipeline keys of `j` and ignores everything else.
PipelineConfig pipeline_from_json(const Json& j, const std::vector<std::string>& outcome_names = {});

Json ci_to_json(const CiSpec& ci);
CiSpec ci_from_json(const Json& j);

Json generator_to_json(const GenConfig& cfg);
GenConfig generator_from_json(const Json& j);

StudyConfig study_from_json(const Json& j);
Json study_to_json(const StudyConfig& cfg);

Json famd_to_json(const FamdProjection& p);
FamdProjection famd_from_json(const Json& j);
Json metric_to_json(const Metric& m);
Metric metric_from_json(const Json& j);

// Throws ConfigError naming the first key of `j` not listed in `allowed`.
void require_known_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& context);

}  // namespace causalwr
