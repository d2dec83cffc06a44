#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "causalwr/dataset.hpp"

namespace causalwr {

// Column roles of an input table. Covariates default to every remaining
// column; a column is categorical when declared so or when any cell fails
// to parse as a number.
struct IngestConfig {
  std::string treatment = "T";
  std::vector<std::string> outcomes;
  std::optional<std::vector<std::string>> covariates;
  std::vector<std::string> categorical;
};

// Comma-separated, header row, optional double quotes. Cells that are empty
// or one of NA, NaN, NULL, "." are missing and rejected with their line
// numbers.
Dataset ingest_csv(const std::string& path, const IngestConfig& cfg);
Dataset read_csv(std::istream& in, const IngestConfig& cfg);

// Covariates (categorical values as level labels), treatment, outcomes.
void write_csv(const std::string& path, const Dataset& d);
void write_csv(std::ostream& out, const Dataset& d);

}  // namespace causalwr
