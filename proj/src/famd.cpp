#include "causalwr/famd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "causalwr/errors.hpp"

namespace causalwr {

namespace {

std::size_t preprocessed_width(const std::vector<CovariateColumn>& schema) {
  std::size_t w = 0;
  for (const auto& col : schema) w += col.kind == ColumnKind::Numeric ? 1 : col.levels.size();
  return w;
}

}  // namespace

RowMatrix FamdProjection::preprocess(const Dataset& d) const {
  if (d.p() != schema.size())
    throw InvalidInput("dataset has " + std::to_string(d.p()) + " covariates, projection expects " +
                       std::to_string(schema.size()));
  RowMatrix z = RowMatrix::Zero(d.n(), preprocessed_width(schema));
  std::size_t offset = 0;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& fitted = schema[c];
    const auto& incoming = d.schema()[c];
    if (fitted.name != incoming.name || fitted.kind != incoming.kind)
      throw InvalidInput("covariate column " + std::to_string(c) + " ('" + incoming.name +
                         "') does not match the fitted schema ('" + fitted.name + "')");
    if (fitted.kind == ColumnKind::Numeric) {
      for (std::size_t i = 0; i < d.n(); ++i)
        z(i, offset) = sds[c] > 0 ? (d.covariates()(i, c) - means[c]) / sds[c] : 0.0;
      ++offset;
      continue;
    }
    // Map incoming level codes onto the fitted level order by label.
    std::vector<std::ptrdiff_t> remap(incoming.levels.size(), -1);
    for (std::size_t l = 0; l < incoming.levels.size(); ++l) {
      auto it = std::find(fitted.levels.begin(), fitted.levels.end(), incoming.levels[l]);
      if (it != fitted.levels.end()) remap[l] = it - fitted.levels.begin();
    }
    const auto& freq = level_frequencies[c];
    for (std::size_t i = 0; i < d.n(); ++i) {
      const auto code = static_cast<std::size_t>(d.covariates()(i, c));
      const auto level = remap[code];
      if (level < 0 || freq[level] <= 0.0)
        throw InvalidInput("categorical column '" + fitted.name + "' has level '" + incoming.levels[code] +
                           "' unseen when the projection was fitted");
    }
    for (std::size_t l = 0; l < fitted.levels.size(); ++l) {
      const double f = freq[l];
      if (f <= 0.0) continue;
      const double scale = 1.0 / std::sqrt(f);
      for (std::size_t i = 0; i < d.n(); ++i) {
        const auto code = static_cast<std::size_t>(d.covariates()(i, c));
        const double indicator = static_cast<std::size_t>(remap[code]) == l ? 1.0 : 0.0;
        z(i, offset + l) = (indicator - f) * scale;
      }
    }
    offset += fitted.levels.size();
  }
  return z;
}

FamdProjection famd_fit(const Dataset& d, double variance_kept) {
  if (d.p() == 0) throw InvalidInput("FAMD needs at least one covariate column");
  if (!(variance_kept > 0.0 && variance_kept <= 1.0)) throw InvalidInput("variance_kept must lie in (0, 1]");

  FamdProjection proj;
  proj.schema = d.schema();
  proj.variance_kept = variance_kept;
  proj.means.assign(d.p(), 0.0);
  proj.sds.assign(d.p(), 0.0);
  proj.level_frequencies.resize(d.p());
  const double n = static_cast<double>(d.n());
  for (std::size_t c = 0; c < d.p(); ++c) {
    const auto col = d.covariates().col(c);
    if (proj.schema[c].kind == ColumnKind::Numeric) {
      const double mean = col.mean();
      proj.means[c] = mean;
      proj.sds[c] = std::sqrt((col.array() - mean).square().sum() / n);
    } else {
      auto& freq = proj.level_frequencies[c];
      freq.assign(proj.schema[c].levels.size(), 0.0);
      for (std::size_t i = 0; i < d.n(); ++i) freq[static_cast<std::size_t>(col(i))] += 1.0;
      for (auto& f : freq) f /= n;
    }
  }

  const RowMatrix z = proj.preprocess(d);
  const Eigen::MatrixXd cov = (z.transpose() * z) / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("FAMD eigen-decomposition failed");

  // Eigen returns ascending eigenvalues; reverse into descending order.
  const auto width = cov.rows();
  proj.eigenvalues.resize(width);
  proj.axes.resize(width, width);
  for (Eigen::Index k = 0; k < width; ++k) {
    proj.eigenvalues(k) = std::max(0.0, solver.eigenvalues()(width - 1 - k));
    proj.axes.col(k) = solver.eigenvectors().col(width - 1 - k);
  }
  const double total = proj.eigenvalues.sum();
  proj.components = 1;
  proj.explained_variance = total > 0 ? proj.eigenvalues(0) / total : 1.0;
  if (total > 0) {
    double cumulative = 0.0;
    for (Eigen::Index k = 0; k < width; ++k) {
      cumulative += proj.eigenvalues(k);
      proj.components = static_cast<std::size_t>(k + 1);
      proj.explained_variance = cumulative / total;
      if (proj.explained_variance >= variance_kept - 1e-12) break;
    }
  }
  return proj;
}

RowMatrix famd_apply(const FamdProjection& projection, const Dataset& d) {
  const RowMatrix z = projection.preprocess(d);
  return z * projection.axes.leftCols(static_cast<Eigen::Index>(projection.components));
}

}  // namespace causalwr
