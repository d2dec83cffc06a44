#include "causalwr/simulate.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "causalwr/errors.hpp"
#include "causalwr/logistic.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

std::string to_string(TreatmentKind kind) {
  switch (kind) {
    case TreatmentKind::Constant:
      return "constant";
    case TreatmentKind::LogitLinear:
      return "linear";
    case TreatmentKind::NonlinearProduct:
      return "product";
    case TreatmentKind::Alternating:
      return "alternating";
    case TreatmentKind::Fixed:
      return "fixed";
  }
  return "unknown";
}

std::string to_string(OutcomeMode mode) {
  switch (mode) {
    case OutcomeMode::Correlated:
      return "correlated";
    case OutcomeMode::Uncorrelated:
      return "uncorrelated";
    case OutcomeMode::NonlinearQuadratic:
      return "quadratic";
    case OutcomeMode::TwoGroup:
      return "two-group";
  }
  return "unknown";
}

std::string to_string(LinkFunction link) { return link == LinkFunction::NormalCdf ? "normal-cdf" : "logistic"; }

double apply_link(LinkFunction link, double z) noexcept {
  if (link == LinkFunction::Logistic) return expit(z);
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

void GenConfig::validate() const {
  if (n < 2) throw InvalidInput("generator needs n >= 2");
  if (p == 0) throw InvalidInput("generator needs p >= 1");
  if (d == 0) throw InvalidInput("generator needs d >= 1");
  switch (treatment.kind) {
    case TreatmentKind::Constant:
      if (!(treatment.pi > 0.0 && treatment.pi < 1.0)) throw InvalidInput("constant treatment probability must lie in (0, 1)");
      break;
    case TreatmentKind::LogitLinear:
      if (treatment.v.size() != 0 && static_cast<std::size_t>(treatment.v.size()) != p)
        throw InvalidInput("treatment vector v must have length p=" + std::to_string(p));
      if (treatment.v.size() != 0 && treatment.v.norm() == 0.0) throw InvalidInput("treatment vector v is zero");
      break;
    case TreatmentKind::NonlinearProduct:
      if (p < 2) throw InvalidInput("the product treatment link needs p >= 2");
      break;
    case TreatmentKind::Alternating:
      break;
    case TreatmentKind::Fixed:
      if (treatment.assignment.size() != n) throw InvalidInput("fixed assignment must list n treatments");
      break;
  }
  switch (outcome) {
    case OutcomeMode::Correlated:
      for (const auto* u : {&u0, &u1}) {
        if (u->size() != 0 && static_cast<std::size_t>(u->size()) != p)
          throw InvalidInput("outcome vectors u0, u1 must have length p=" + std::to_string(p));
        if (u->size() != 0 && u->norm() == 0.0) throw InvalidInput("outcome vector is zero");
      }
      break;
    case OutcomeMode::Uncorrelated:
      break;
    case OutcomeMode::NonlinearQuadratic:
      if (p < 2) throw InvalidInput("the quadratic outcome design needs p >= 2");
      break;
    case OutcomeMode::TwoGroup:
      if (d != 1) throw InvalidInput("the two-group design has univariate outcomes (d = 1)");
      if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in [0, 1)");
      if (!(values.y0_prime > values.y1 && values.y1 > values.y0 && values.y0 > values.y1_prime))
        throw InvalidInput("two-group values must satisfy y0' > y1 > y0 > y1'");
      break;
  }
}

namespace {

Eigen::VectorXd random_unit(std::size_t p, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(static_cast<Eigen::Index>(p));
  do {
    for (auto& v : u) v = normal(rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

bool in_group_two(std::span<const double> x) { return x[0] > 0.5; }

}  // namespace

Design resolve_design(const GenConfig& cfg) {
  cfg.validate();
  Design design;
  const auto p = static_cast<Eigen::Index>(cfg.p);
  const auto d = static_cast<Eigen::Index>(cfg.d);
  design.v = cfg.treatment.v.size() != 0 ? Eigen::VectorXd(cfg.treatment.v / cfg.treatment.v.norm())
                                         : Eigen::VectorXd(Eigen::VectorXd::Ones(p) / std::sqrt(static_cast<double>(p)));
  design.u0 = Eigen::MatrixXd::Zero(d, p);
  design.u1 = Eigen::MatrixXd::Zero(d, p);
  if (cfg.outcome == OutcomeMode::Correlated) {
    const Eigen::VectorXd a = cfg.u0.size() != 0 ? Eigen::VectorXd(cfg.u0 / cfg.u0.norm()) : random_unit(cfg.p, derive_seed(cfg.design_seed, 0));
    const Eigen::VectorXd b = cfg.u1.size() != 0 ? Eigen::VectorXd(cfg.u1 / cfg.u1.norm()) : random_unit(cfg.p, derive_seed(cfg.design_seed, 1));
    for (Eigen::Index k = 0; k < d; ++k) {
      design.u0.row(k) = a.transpose();
      design.u1.row(k) = b.transpose();
    }
  } else if (cfg.outcome == OutcomeMode::Uncorrelated) {
    for (Eigen::Index k = 0; k < d; ++k) {
      design.u0.row(k) = random_unit(cfg.p, derive_seed(cfg.design_seed, 2, static_cast<std::uint64_t>(k))).transpose();
      design.u1.row(k) = random_unit(cfg.p, derive_seed(cfg.design_seed, 3, static_cast<std::uint64_t>(k))).transpose();
    }
  }
  return design;
}

double true_propensity(const GenConfig& cfg, const Design& design, std::span<const double> x) {
  switch (cfg.treatment.kind) {
    case TreatmentKind::Constant:
      return cfg.treatment.pi;
    case TreatmentKind::LogitLinear: {
      double z = 0.0;
      for (std::size_t j = 0; j < cfg.p; ++j) z += design.v(static_cast<Eigen::Index>(j)) * x[j];
      return apply_link(cfg.link, z);
    }
    case TreatmentKind::NonlinearProduct:
      return apply_link(cfg.link, x[0] * x[1]);
    case TreatmentKind::Alternating:
    case TreatmentKind::Fixed:
      break;
  }
  throw Unsupported("treatment '" + to_string(cfg.treatment.kind) + "' is design-based and has no propensity function");
}

std::vector<double> outcome_probabilities(const GenConfig& cfg, const Design& design, std::span<const double> x,
                                          int t) {
  if (t != 0 && t != 1) throw InvalidInput("treatment arm must be 0 or 1");
  std::vector<double> probs(cfg.d);
  switch (cfg.outcome) {
    case OutcomeMode::Correlated:
    case OutcomeMode::Uncorrelated: {
      const Eigen::MatrixXd& u = t == 1 ? design.u1 : design.u0;
      for (std::size_t k = 0; k < cfg.d; ++k) {
        double z = 0.0;
        for (std::size_t j = 0; j < cfg.p; ++j) z += u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * x[j];
        probs[k] = apply_link(cfg.link, z);
      }
      return probs;
    }
    case OutcomeMode::NonlinearQuadratic: {
      const double s = t == 1 ? x[0] - x[1] : x[0] + x[1];
      std::fill(probs.begin(), probs.end(), apply_link(cfg.link, s * s));
      return probs;
    }
    case OutcomeMode::TwoGroup:
      break;
  }
  throw Unsupported("the two-group design has point-mass outcomes, not Bernoulli coordinates");
}

ConditionalLaw true_law(const GenConfig& cfg, const Design& design, std::span<const double> x, int t) {
  ConditionalLaw law;
  if (cfg.outcome == OutcomeMode::TwoGroup) {
    const bool two = in_group_two(x);
    law.outcomes.resize(1, 1);
    law.outcomes(0, 0) = t == 1 ? (two ? cfg.values.y1_prime : cfg.values.y1) : (two ? cfg.values.y0_prime : cfg.values.y0);
    law.probabilities = {1.0};
    return law;
  }
  if (cfg.d > 16) throw Unsupported("explicit outcome law beyond 16 binary coordinates");
  const auto probs = outcome_probabilities(cfg, design, x, t);
  const std::size_t atoms = std::size_t{1} << cfg.d;
  law.outcomes.resize(static_cast<Eigen::Index>(atoms), static_cast<Eigen::Index>(cfg.d));
  law.probabilities.resize(atoms);
  for (std::size_t mask = 0; mask < atoms; ++mask) {
    double mass = 1.0;
    for (std::size_t k = 0; k < cfg.d; ++k) {
      const bool bit = (mask >> k) & 1u;
      law.outcomes(static_cast<Eigen::Index>(mask), static_cast<Eigen::Index>(k)) = bit ? 1.0 : 0.0;
      mass *= bit ? probs[k] : 1.0 - probs[k];
    }
    law.probabilities[mask] = mass;
  }
  return law;
}

namespace {

void draw_covariates(const GenConfig& cfg, std::size_t i, Rng& rng, std::normal_distribution<double>& normal,
                     std::vector<double>& x) {
  x.resize(cfg.p);
  if (cfg.outcome == OutcomeMode::TwoGroup) {
    bool two;
    if (cfg.deterministic_layout) {
      const auto group_two = static_cast<std::size_t>(std::llround(cfg.alpha * static_cast<double>(cfg.n)));
      two = i >= cfg.n - group_two;
    } else {
      two = std::bernoulli_distribution(cfg.alpha)(rng);
    }
    x[0] = two ? 1.0 : 0.0;
    for (std::size_t j = 1; j < cfg.p; ++j) x[j] = normal(rng);
    return;
  }
  for (auto& v : x) v = normal(rng);
}

void draw_outcome(const GenConfig& cfg, const Design& design, std::span<const double> x, int t, Rng& rng,
                  double* out) {
  if (cfg.outcome == OutcomeMode::TwoGroup) {
    const bool two = in_group_two(x);
    out[0] = t == 1 ? (two ? cfg.values.y1_prime : cfg.values.y1) : (two ? cfg.values.y0_prime : cfg.values.y0);
    return;
  }
  const auto probs = outcome_probabilities(cfg, design, x, t);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t k = 0; k < cfg.d; ++k) out[k] = unif(rng) < probs[k] ? 1.0 : 0.0;
}

}  // namespace

SimulatedData generate(const GenConfig& cfg) {
  const Design design = resolve_design(cfg);
  Rng rng = make_rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cfg.p));
  std::vector<int> t(cfg.n);
  RowMatrix y(n, static_cast<Eigen::Index>(cfg.d)), y0(n, static_cast<Eigen::Index>(cfg.d)),
      y1(n, static_cast<Eigen::Index>(cfg.d));
  std::vector<double> pi(cfg.n);
  std::vector<double> xi;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    draw_covariates(cfg, i, rng, normal, xi);
    for (std::size_t j = 0; j < cfg.p; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xi[j];
    switch (cfg.treatment.kind) {
      case TreatmentKind::Alternating:
        t[i] = i % 2 == 0 ? 1 : 0;
        pi[i] = 0.5;
        break;
      case TreatmentKind::Fixed:
        t[i] = cfg.treatment.assignment[i];
        pi[i] = 0.5;
        break;
      default:
        pi[i] = true_propensity(cfg, design, xi);
        t[i] = unif(rng) < pi[i] ? 1 : 0;
    }
    draw_outcome(cfg, design, xi, 0, rng, y0.data() + i * cfg.d);
    draw_outcome(cfg, design, xi, 1, rng, y1.data() + i * cfg.d);
    y.row(static_cast<Eigen::Index>(i)) = t[i] == 1 ? y1.row(static_cast<Eigen::Index>(i)) : y0.row(static_cast<Eigen::Index>(i));
  }
  if (cfg.treatment.kind == TreatmentKind::Fixed) {
    const double share = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(cfg.n);
    std::fill(pi.begin(), pi.end(), share);
  }
  return SimulatedData{Dataset::numeric(std::move(x), std::move(t), std::move(y)), std::move(y0), std::move(y1),
                       std::move(pi), design};
}

SimulatedData example_one() {
  GenConfig cfg;
  cfg.n = 6;
  cfg.p = 1;
  cfg.d = 1;
  cfg.outcome = OutcomeMode::TwoGroup;
  cfg.alpha = 1.0 / 3.0;
  cfg.deterministic_layout = true;
  cfg.treatment.kind = TreatmentKind::Alternating;
  return generate(cfg);
}

namespace {

std::vector<double> covariate_row(const Dataset& d, std::size_t row) {
  std::vector<double> x(d.p());
  for (std::size_t j = 0; j < d.p(); ++j) x[j] = d.covariates()(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
  return x;
}

void check_width(const GenConfig& cfg, const Dataset& d) {
  if (d.p() != cfg.p)
    throw InvalidInput("oracle expects " + std::to_string(cfg.p) + " covariates, dataset has " + std::to_string(d.p()));
}

}  // namespace

PropensityModel oracle_propensity(const GenConfig& cfg, Clip clip) {
  const Design design = resolve_design(cfg);
  if (cfg.treatment.kind == TreatmentKind::Constant) return PropensityModel::constant(cfg.treatment.pi, clip);
  if (cfg.treatment.kind == TreatmentKind::Alternating) return PropensityModel::constant(0.5, clip);
  if (cfg.treatment.kind == TreatmentKind::Fixed) throw Unsupported("a fixed assignment has no oracle propensity");
  return PropensityModel::plugin(
      [cfg, design](const Dataset& d, std::size_t row) {
        check_width(cfg, d);
        return true_propensity(cfg, design, covariate_row(d, row));
      },
      clip, "oracle");
}

std::shared_ptr<OracleDistReg> oracle_distreg(const GenConfig& cfg) {
  const Design design = resolve_design(cfg);
  LawFunction law = [cfg, design](int t, const Dataset& d, std::size_t row) {
    check_width(cfg, d);
    return true_law(cfg, design, covariate_row(d, row), t);
  };
  QFunction q;
  if (cfg.outcome != OutcomeMode::TwoGroup) {
    q = [cfg, design](int t, const Dataset& d, std::size_t row, std::span<const double> y, const HierarchySpec& h) {
      check_width(cfg, d);
      const auto probs = outcome_probabilities(cfg, design, covariate_row(d, row), t);
      return bernoulli_q(probs, t, y, h, LatticeMethod::Prefix);
    };
  }
  return std::make_shared<OracleDistReg>(std::move(law), std::move(q));
}

OracleResult oracle_taus(const GenConfig& cfg, const HierarchySpec& h, std::size_t draws) {
  const Design design = resolve_design(cfg);
  h.validate_for(cfg.d);
  h.tie_value();
  OracleResult out;
  if (cfg.outcome == OutcomeMode::TwoGroup) {
    const auto& v = cfg.values;
    const double mass[2] = {1.0 - cfg.alpha, cfg.alpha};
    const double y1[2] = {v.y1, v.y1_prime};
    const double y0[2] = {v.y0, v.y0_prime};
    auto w = [&](double a, double b) { return h.win(std::span<const double>(&a, 1), std::span<const double>(&b, 1)); };
    for (int g = 0; g < 2; ++g) {
      out.tau_indiv += mass[g] * w(y1[g], y0[g]);
      for (int g2 = 0; g2 < 2; ++g2) out.tau_pop += mass[g] * mass[g2] * w(y1[g], y0[g2]);
    }
    out.tau_star = out.tau_indiv;
    out.method = OracleMethod::ClosedForm;
    return out;
  }
  if (draws < 10000) throw InvalidInput("Monte-Carlo oracle needs at least 10^4 draws");
  constexpr std::size_t kChunk = 1 << 16;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  struct Sums {
    double indiv = 0, indiv2 = 0, pop = 0, pop2 = 0, star = 0, star2 = 0;
  };
  std::vector<Sums> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_rng(derive_seed(cfg.seed, 0x0AC1E, c));
    std::normal_distribution<double> normal;
    const std::size_t begin = c * kChunk;
    const std::size_t count = std::min(draws, begin + kChunk) - begin;
    RowMatrix y0(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(cfg.d));
    RowMatrix y1(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(cfg.d));
    std::vector<double> x;
    Sums s;
    for (std::size_t r = 0; r < count; ++r) {
      draw_covariates(cfg, begin + r, rng, normal, x);
      draw_outcome(cfg, design, x, 0, rng, y0.data() + r * cfg.d);
      draw_outcome(cfg, design, x, 1, rng, y1.data() + r * cfg.d);
      const std::span<const double> a(y1.data() + r * cfg.d, cfg.d), b(y0.data() + r * cfg.d, cfg.d);
      const double indiv = h.win(a, b);
      const double star = bernoulli_q(outcome_probabilities(cfg, design, x, 1), 1, b, h, LatticeMethod::Prefix);
      s.indiv += indiv;
      s.indiv2 += indiv * indiv;
      s.star += star;
      s.star2 += star * star;
    }
    // Independent units: treated outcome of draw r+1 against control outcome of draw r.
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t j = (r + 1) % count;
      const double pop = h.win(std::span<const double>(y1.data() + j * cfg.d, cfg.d),
                               std::span<const double>(y0.data() + r * cfg.d, cfg.d));
      s.pop += pop;
      s.pop2 += pop * pop;
    }
    partial[c] = s;
  });
  Sums total;
  for (const auto& s : partial) {
    total.indiv += s.indiv;
    total.indiv2 += s.indiv2;
    total.pop += s.pop;
    total.pop2 += s.pop2;
    total.star += s.star;
    total.star2 += s.star2;
  }
  const double r = static_cast<double>(draws);
  auto se = [r](double sum, double sum2) {
    const double mean = sum / r;
    return std::sqrt(std::max(0.0, sum2 / r - mean * mean) / r);
  };
  out.method = OracleMethod::MonteCarlo;
  out.draws = draws;
  out.tau_indiv = total.indiv / r;
  out.tau_pop = total.pop / r;
  out.tau_star = total.star / r;
  out.se_indiv = se(total.indiv, total.indiv2);
  out.se_pop = se(total.pop, total.pop2);
  out.se_star = se(total.star, total.star2);
  return out;
}

TvBounds tv_proxy_bounds(const GenConfig& cfg, const HierarchySpec& h, std::size_t covariate_draws) {
  const Design design = resolve_design(cfg);
  h.validate_for(cfg.d);
  h.tie_value();
  if (cfg.d > 12) throw Unsupported("total-variation bounds enumerate at most 2^12 outcome values");

  // Covariate support: the two groups exactly, or Monte-Carlo draws.
  std::vector<std::vector<double>> xs;
  std::vector<double> mass;
  TvBounds out;
  if (cfg.outcome == OutcomeMode::TwoGroup) {
    std::vector<double> g1(cfg.p, 0.0), g2(cfg.p, 0.0);
    g2[0] = 1.0;
    xs = {g1, g2};
    mass = {1.0 - cfg.alpha, cfg.alpha};
  } else {
    if (covariate_draws == 0) throw InvalidInput("covariate_draws must be >= 1");
    Rng rng = make_rng(derive_seed(cfg.seed, 0x7F));
    std::normal_distribution<double> normal;
    xs.resize(covariate_draws);
    for (std::size_t i = 0; i < covariate_draws; ++i) draw_covariates(cfg, i, rng, normal, xs[i]);
    mass.assign(covariate_draws, 1.0 / static_cast<double>(covariate_draws));
    out.exact = false;
  }
  out.covariate_draws = xs.size();

  std::map<std::vector<double>, std::size_t> index1, index0;
  std::vector<std::vector<double>> atoms1, atoms0;
  auto atom_index = [](std::map<std::vector<double>, std::size_t>& index, std::vector<std::vector<double>>& atoms,
                       const RowMatrix& m, Eigen::Index row) {
    std::vector<double> key(m.row(row).data(), m.row(row).data() + m.cols());
    auto [it, inserted] = index.emplace(key, atoms.size());
    if (inserted) atoms.push_back(std::move(key));
    return it->second;
  };
  struct Mass {
    std::size_t atom;
    double p;
  };
  std::vector<std::vector<Mass>> laws1(xs.size()), laws0(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const ConditionalLaw l1 = true_law(cfg, design, xs[i], 1);
    const ConditionalLaw l0 = true_law(cfg, design, xs[i], 0);
    for (std::size_t a = 0; a < l1.probabilities.size(); ++a)
      laws1[i].push_back({atom_index(index1, atoms1, l1.outcomes, static_cast<Eigen::Index>(a)), l1.probabilities[a]});
    for (std::size_t b = 0; b < l0.probabilities.size(); ++b)
      laws0[i].push_back({atom_index(index0, atoms0, l0.outcomes, static_cast<Eigen::Index>(b)), l0.probabilities[b]});
  }
  const std::size_t na = atoms1.size(), nb = atoms0.size();
  // The generator couples Y(0), Y(1) conditionally independently, so its
  // joint law and the τ⋆ coupling are both E_X[P1(.|X) ⊗ P0(.|X)].
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
  Eigen::MatrixXd star = joint;
  Eigen::VectorXd marginal1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(na));
  Eigen::VectorXd marginal0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (const auto& a : laws1[i]) {
      marginal1(static_cast<Eigen::Index>(a.atom)) += mass[i] * a.p;
      for (const auto& b : laws0[i]) {
        const double m = mass[i] * a.p * b.p;
        joint(static_cast<Eigen::Index>(a.atom), static_cast<Eigen::Index>(b.atom)) += m;
        star(static_cast<Eigen::Index>(a.atom), static_cast<Eigen::Index>(b.atom)) += m;
      }
    }
    for (const auto& b : laws0[i]) marginal0(static_cast<Eigen::Index>(b.atom)) += mass[i] * b.p;
  }
  const Eigen::MatrixXd pop = marginal1 * marginal0.transpose();
  Eigen::MatrixXd win(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b)
      win(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = h.win(atoms1[a], atoms0[b]);
  out.bound_star = 0.5 * (star - joint).cwiseAbs().sum();
  out.bound_pop = 0.5 * (pop - joint).cwiseAbs().sum();
  out.tau_indiv = joint.cwiseProduct(win).sum();
  out.tau_star = star.cwiseProduct(win).sum();
  out.tau_pop = pop.cwiseProduct(win).sum();
  return out;
}

}  // namespace causalwr
