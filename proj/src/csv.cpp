#include "causalwr/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "causalwr/errors.hpp"

namespace causalwr {

namespace {

struct Record {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

std::vector<Record> parse_records(std::istream& in) {
  std::vector<Record> records;
  Record current;
  std::string cell;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  current.line = 1;
  char c;
  auto end_record = [&] {
    current.cells.push_back(std::move(cell));
    cell.clear();
    const bool blank = current.cells.size() == 1 && current.cells[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    current.line = line;
    any = false;
  };
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      current.cells.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      ++line;
      end_record();
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (quoted) throw InvalidInput("unterminated quoted cell starting before line " + std::to_string(line));
  if (any) end_record();
  return records;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& s) {
  static const std::set<std::string> markers = {"", "NA", "N/A", "NaN", "nan", "NULL", "null", "."};
  return markers.count(s) > 0;
}

bool parse_number(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Dataset read_csv(std::istream& in, const IngestConfig& cfg) {
  std::vector<Record> records = parse_records(in);
  if (records.empty()) throw InvalidInput("input has no header row");
  std::vector<std::string> header;
  for (auto& h : records[0].cells) header.push_back(trim(h));
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw InvalidInput("header column " + std::to_string(c + 1) + " has no name");
    if (!index.emplace(header[c], c).second) throw InvalidInput("duplicate column '" + header[c] + "'");
  }
  auto find = [&](const std::string& name, const char* role) {
    auto it = index.find(name);
    if (it == index.end()) throw InvalidInput(std::string("unknown ") + role + " column '" + name + "'");
    return it->second;
  };
  if (cfg.outcomes.empty()) throw InvalidInput("no outcome columns declared");
  const std::size_t t_col = find(cfg.treatment, "treatment");
  std::vector<std::size_t> y_cols;
  for (const auto& name : cfg.outcomes) y_cols.push_back(find(name, "outcome"));
  std::vector<std::size_t> x_cols;
  if (cfg.covariates) {
    for (const auto& name : *cfg.covariates) x_cols.push_back(find(name, "covariate"));
  } else {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != t_col && std::find(y_cols.begin(), y_cols.end(), c) == y_cols.end()) x_cols.push_back(c);
  }
  for (const auto& name : cfg.categorical) find(name, "categorical");

  const std::size_t n = records.size() - 1;
  std::vector<std::vector<std::string>> cells(n);
  std::vector<std::string> problems;
  for (std::size_t r = 0; r < n; ++r) {
    const Record& rec = records[r + 1];
    if (rec.cells.size() != header.size())
      throw InvalidInput("line " + std::to_string(rec.line) + ": expected " + std::to_string(header.size()) +
                         " cells, found " + std::to_string(rec.cells.size()));
    cells[r].reserve(header.size());
    for (const auto& c : rec.cells) cells[r].push_back(trim(c));
    std::vector<std::string> missing;
    auto check = [&](std::size_t c) {
      if (is_missing(cells[r][c])) missing.push_back(header[c]);
    };
    check(t_col);
    for (auto c : y_cols) check(c);
    for (auto c : x_cols) check(c);
    if (!missing.empty()) {
      std::string cols;
      for (const auto& m : missing) cols += (cols.empty() ? "" : ", ") + m;
      problems.push_back("line " + std::to_string(rec.line) + " (" + cols + ")");
    }
  }
  if (!problems.empty()) {
    std::string msg = "missing values are not supported; impute before ingestion. Rows with missing cells: ";
    for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg += (i ? "; " : "") + problems[i];
    if (problems.size() > 20) msg += "; and " + std::to_string(problems.size() - 20) + " more";
    throw InvalidInput(msg);
  }
  if (n < 2) throw InvalidInput("need at least 2 data rows, found " + std::to_string(n));

  std::vector<int> t(n);
  for (std::size_t r = 0; r < n; ++r) {
    double v;
    if (!parse_number(cells[r][t_col], v) || (v != 0.0 && v != 1.0))
      throw InvalidInput("line " + std::to_string(records[r + 1].line) + ": treatment column '" + cfg.treatment +
                         "' must be 0 or 1, found '" + cells[r][t_col] + "'");
    t[r] = static_cast<int>(v);
  }
  RowMatrix y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(y_cols.size()));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < y_cols.size(); ++k) {
      double v;
      if (!parse_number(cells[r][y_cols[k]], v))
        throw InvalidInput("line " + std::to_string(records[r + 1].line) + ": outcome '" + header[y_cols[k]] +
                           "' is not numeric ('" + cells[r][y_cols[k]] + "'); encode ordinal outcomes as numbers");
      y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
    }

  std::vector<CovariateColumn> schema;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(x_cols.size()));
  for (std::size_t j = 0; j < x_cols.size(); ++j) {
    const std::size_t c = x_cols[j];
    bool categorical = std::find(cfg.categorical.begin(), cfg.categorical.end(), header[c]) != cfg.categorical.end();
    std::vector<double> values(n);
    for (std::size_t r = 0; r < n && !categorical; ++r)
      if (!parse_number(cells[r][c], values[r])) categorical = true;
    if (!categorical) {
      schema.push_back(CovariateColumn::numeric(header[c]));
      for (std::size_t r = 0; r < n; ++r) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = values[r];
      continue;
    }
    std::set<std::string> level_set;
    for (std::size_t r = 0; r < n; ++r) level_set.insert(cells[r][c]);
    std::vector<std::string> levels(level_set.begin(), level_set.end());
    for (std::size_t r = 0; r < n; ++r)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = static_cast<double>(
          std::lower_bound(levels.begin(), levels.end(), cells[r][c]) - levels.begin());
    schema.push_back(CovariateColumn::categorical(header[c], std::move(levels)));
  }
  std::vector<std::string> outcome_names;
  for (auto c : y_cols) outcome_names.push_back(header[c]);
  return Dataset(std::move(schema), std::move(x), std::move(t), std::move(y), std::move(outcome_names),
                 cfg.treatment);
}

Dataset ingest_csv(const std::string& path, const IngestConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open input file '" + path + "'");
  return read_csv(in, cfg);
}

void write_csv(std::ostream& out, const Dataset& d) {
  std::vector<std::string> header;
  for (const auto& col : d.schema()) header.push_back(col.name);
  header.push_back(d.treatment_name());
  for (const auto& name : d.outcome_names()) header.push_back(name);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << quote(header[c]);
  out << '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = 0; j < d.p(); ++j) {
      const double v = d.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const auto& col = d.schema()[j];
      out << (col.kind == ColumnKind::Categorical ? quote(col.levels[static_cast<std::size_t>(v)]) : format_number(v))
          << ',';
    }
    out << d.arm(i);
    for (double v : d.outcome(i)) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open output file '" + path + "'");
  write_csv(out, d);
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace causalwr
