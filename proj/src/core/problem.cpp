#include "hidden_basis/problem.hpp"

#include <cmath>
#include <limits>

#include "hidden_basis/error.hpp"
#include "hidden_basis/seeding.hpp"

namespace hidden_basis {
namespace {

template <typename T>
T field(const Json& spec, const char* key, const std::string& who) {
  require(spec.contains(key), ErrorCode::kConfig,
          who + ": missing field '" + key + "'");
  try {
    return spec.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kConfig, who + ": bad field '" + key + "': " + e.what());
  }
}

Vector to_vector(const std::vector<double>& xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = xs[i];
  }
  return v;
}

Json matrix_columns_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Json col = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) col.push_back(m(i, j));
    out.push_back(col);
  }
  return out;
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(); }

Problem make_ica(const Json& spec, std::uint64_t seed) {
  const std::string who = "ica generator";
  const auto names = field<std::vector<std::string>>(spec, "sources", who);
  const auto n = field<long long>(spec, "n", who);
  require(names.size() >= 2, ErrorCode::kConfig, who + ": need >= 2 sources");
  require(n >= 2, ErrorCode::kConfig, who + ": n must be >= 2");
  const auto d = static_cast<Eigen::Index>(names.size());
  std::vector<SourceLaw> laws;
  for (const auto& name : names) laws.push_back(source_law_from_string(name));

  Rng mixing_rng(spec.value("mixing_seed", std::uint64_t{0}));
  const Matrix mixing = random_rotation(d, mixing_rng);
  Rng rng(seed);
  Matrix sources(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      sources(i, j) = draw_source(laws[static_cast<std::size_t>(j)], rng);
    }
  }
  Problem p;
  p.kind = ProblemKind::kIca;
  p.dimension = d;
  p.samples = std::make_shared<const Matrix>(sources * mixing.transpose());
  p.truth = mixing;
  return p;
}

Problem make_gmm(const Json& spec, std::uint64_t seed) {
  const std::string who = "gmm generator";
  const Vector weights =
      to_vector(field<std::vector<double>>(spec, "weights", who));
  const auto rows = field<std::vector<std::vector<double>>>(spec, "means", who);
  const double sigma = field<double>(spec, "sigma", who);
  require(static_cast<Eigen::Index>(rows.size()) == weights.size() &&
              !rows.empty(),
          ErrorCode::kConfig, who + ": one mean per weight");
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  require(d >= 2, ErrorCode::kConfig, who + ": means need >= 2 coordinates");
  Matrix means(d, weights.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(static_cast<Eigen::Index>(rows[k].size()) == d, ErrorCode::kConfig,
            who + ": means differ in dimension");
    means.col(static_cast<Eigen::Index>(k)) = to_vector(rows[k]);
  }
  require(sigma > 0, ErrorCode::kConfig, who + ": sigma must be positive");
  require((weights.array() > 0).all() && std::abs(weights.sum() - 1.0) <= 1e-9,
          ErrorCode::kConfig, who + ": weights must be positive and sum to 1");

  Problem p;
  p.kind = ProblemKind::kGmm;
  p.dimension = d;
  p.gmm = GmmTruth{weights, means, sigma};
  p.population = spec.value("population", false);
  if (!p.population) {
    const auto n = field<long long>(spec, "n", who);
    require(n >= 2, ErrorCode::kConfig, who + ": n must be >= 2");
    Rng rng(seed);
    std::discrete_distribution<int> pick(weights.data(),
                                         weights.data() + weights.size());
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = pick(rng);
      for (Eigen::Index j = 0; j < d; ++j) {
        x(i, j) = means(j, k) + sigma * normal(rng);
      }
    }
    p.samples = std::make_shared<const Matrix>(std::move(x));
  }
  return p;
}

Problem make_odeco(const Json& spec) {
  const std::string who = "odeco generator";
  const auto d = field<Eigen::Index>(spec, "dimension", who);
  OdecoTensor t;
  t.order = field<int>(spec, "order", who);
  t.weights = to_vector(field<std::vector<double>>(spec, "weights", who));
  t.directions = basis_from_json(spec.contains("basis") ? spec.at("basis") : Json(),
                                 d, t.weights.size());
  t.validate();
  Problem p;
  p.kind = ProblemKind::kTensor;
  p.dimension = d;
  p.truth = t.directions;
  p.tensor = std::move(t);
  return p;
}

Problem make_spectral(const Json& spec, std::uint64_t seed) {
  const std::string who = "spectral generator";
  const auto d = field<Eigen::Index>(spec, "dimension", who);
  const auto counts = field<std::vector<int>>(spec, "counts", who);
  const auto m = static_cast<Eigen::Index>(counts.size());
  std::vector<double> scales(counts.size(), 1.0);
  if (spec.contains("scales")) {
    scales = field<std::vector<double>>(spec, "scales", who);
  }
  require(scales.size() == counts.size(), ErrorCode::kConfig,
          who + ": one scale per cluster");
  const double noise = spec.value("noise", 0.0);
  require(noise >= 0, ErrorCode::kConfig, who + ": noise must be >= 0");
  const Matrix basis =
      basis_from_json(spec.contains("basis") ? spec.at("basis") : Json(), d, m);

  long long total = 0;
  for (int c : counts) {
    require(c >= 1, ErrorCode::kConfig, who + ": counts must be >= 1");
    total += c;
  }
  Matrix points(total, d);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index row = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (int c = 0; c < counts[static_cast<std::size_t>(j)]; ++c) {
      Vector x = scales[static_cast<std::size_t>(j)] * basis.col(j);
      if (noise > 0) {
        Vector z(d);
        for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
        x += noise * z / z.norm();
      }
      points.row(row++) = x.transpose();
    }
  }
  Problem p;
  p.kind = ProblemKind::kSpectral;
  p.dimension = d;
  p.samples = std::make_shared<const Matrix>(std::move(points));
  p.contrast = spec.contains("contrast") ? contrast_from_json(spec.at("contrast"))
                                         : default_spectral_contrast();
  p.truth = basis;
  return p;
}

// Greedy pairing of estimated and true means by relative error.
MatchReport match_means(const Matrix& estimated, const Matrix& truth) {
  const auto k = static_cast<std::size_t>(estimated.cols());
  const auto m = static_cast<std::size_t>(truth.cols());
  MatchReport report;
  report.permutation.assign(k, -1);
  report.signs.assign(k, 1);
  report.errors.assign(k, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> row_used(k, false), col_used(m, false);
  for (std::size_t step = 0; step < std::min(k, m); ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (row_used[i]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (col_used[j]) continue;
        const auto ci = static_cast<Eigen::Index>(i);
        const auto cj = static_cast<Eigen::Index>(j);
        const double err = (estimated.col(ci) - truth.col(cj)).norm() /
                           std::max(truth.col(cj).norm(), 1e-300);
        if (err < best) {
          best = err;
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = true;
    col_used[bj] = true;
    report.permutation[bi] = static_cast<int>(bj);
    report.errors[bi] = best;
    report.max_error = std::max(report.max_error, best);
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!row_used[i]) report.unmatched.push_back(static_cast<int>(i));
  }
  return report;
}

}  // namespace

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "bef" || name == "synthetic-bef") return ProblemKind::kBef;
  if (name == "ica") return ProblemKind::kIca;
  if (name == "tensor" || name == "odeco") return ProblemKind::kTensor;
  if (name == "spectral" || name == "spectral_ideal") return ProblemKind::kSpectral;
  if (name == "gmm") return ProblemKind::kGmm;
  fail(ErrorCode::kConfig, "unknown problem kind '" + name + "'");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kBef: return "synthetic-bef";
    case ProblemKind::kIca: return "ica";
    case ProblemKind::kTensor: return "tensor";
    case ProblemKind::kSpectral: return "spectral";
    case ProblemKind::kGmm: return "gmm";
  }
  return "unknown";
}

int Problem::components() const {
  switch (kind) {
    case ProblemKind::kBef: return static_cast<int>(bef->size());
    case ProblemKind::kTensor: return static_cast<int>(tensor->weights.size());
    case ProblemKind::kSpectral:
      return truth ? static_cast<int>(truth->cols())
                   : static_cast<int>(dimension);
    case ProblemKind::kIca:
    case ProblemKind::kGmm: return static_cast<int>(dimension);
  }
  return static_cast<int>(dimension);
}

SourceLaw source_law_from_string(const std::string& name) {
  if (name == "uniform") return SourceLaw::kUniform;
  if (name == "laplace") return SourceLaw::kLaplace;
  if (name == "rademacher") return SourceLaw::kRademacher;
  if (name == "gaussian") return SourceLaw::kGaussian;
  fail(ErrorCode::kConfig, "unknown source law '" + name + "'");
}

double draw_source(SourceLaw law, Rng& rng) {
  switch (law) {
    case SourceLaw::kUniform: {
      std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
      return u(rng);
    }
    case SourceLaw::kLaplace: {
      // Unit variance: scale 1/sqrt(2).
      std::exponential_distribution<double> e(std::sqrt(2.0));
      std::bernoulli_distribution coin(0.5);
      const double x = e(rng);
      return coin(rng) ? x : -x;
    }
    case SourceLaw::kRademacher: {
      std::bernoulli_distribution coin(0.5);
      return coin(rng) ? 1.0 : -1.0;
    }
    case SourceLaw::kGaussian: {
      std::normal_distribution<double> n(0.0, 1.0);
      return n(rng);
    }
  }
  return 0.0;
}

double source_kurtosis(SourceLaw law) {
  switch (law) {
    case SourceLaw::kUniform: return -1.2;
    case SourceLaw::kLaplace: return 3.0;
    case SourceLaw::kRademacher: return -2.0;
    case SourceLaw::kGaussian: return 0.0;
  }
  return 0.0;
}

Problem make_problem(const Json& generator, std::uint64_t seed) {
  require(generator.is_object(), ErrorCode::kConfig,
          "generator: expected object");
  const auto kind = field<std::string>(generator, "kind", "generator");
  if (kind == "bef" || kind == "synthetic-bef") {
    Problem p;
    p.kind = ProblemKind::kBef;
    p.bef = std::make_shared<const ExactBef>(bef_from_json(generator));
    p.dimension = p.bef->dimension();
    p.truth = p.bef->basis();
    return p;
  }
  if (kind == "ica") return make_ica(generator, seed);
  if (kind == "gmm") return make_gmm(generator, seed);
  if (kind == "odeco" || kind == "tensor") return make_odeco(generator);
  if (kind == "spectral_ideal" || kind == "spectral") {
    return make_spectral(generator, seed);
  }
  fail(ErrorCode::kConfig, "generator: unknown kind '" + kind + "'");
}

Problem problem_from_samples(ProblemKind kind, Matrix samples) {
  require(kind == ProblemKind::kIca || kind == ProblemKind::kGmm ||
              kind == ProblemKind::kSpectral,
          ErrorCode::kConfig,
          "samples can only back ica, gmm or spectral problems");
  validate_samples(samples);
  require(samples.cols() >= 2, ErrorCode::kInvalidArgument,
          "samples need at least two columns");
  Problem p;
  p.kind = kind;
  p.dimension = samples.cols();
  p.samples = std::make_shared<const Matrix>(std::move(samples));
  if (kind == ProblemKind::kSpectral) p.contrast = default_spectral_contrast();
  return p;
}

Perturbation perturbation_from_json(const Json& spec) {
  require(spec.is_object(), ErrorCode::kConfig, "perturbation: expected object");
  Perturbation p;
  p.epsilon = field<double>(spec, "epsilon", "perturbation");
  require(p.epsilon >= 0, ErrorCode::kConfig,
          "perturbation: epsilon must be >= 0");
  const auto mode = spec.value("mode", std::string("deterministic"));
  if (mode == "deterministic") {
    p.mode = PerturbationMode::kDeterministic;
  } else if (mode == "random" || mode == "seeded-random") {
    p.mode = PerturbationMode::kSeededRandom;
  } else {
    fail(ErrorCode::kConfig, "perturbation: unknown mode '" + mode + "'");
  }
  p.seed = spec.value("seed", std::uint64_t{0});
  return p;
}

GradientOracle problem_oracle(const Problem& problem) {
  switch (problem.kind) {
    case ProblemKind::kBef: return make_exact_oracle(problem.bef);
    case ProblemKind::kTensor: return tensor_oracle(*problem.tensor);
    case ProblemKind::kSpectral:
      return spectral_oracle(*problem.samples,
                             problem.contrast.value_or(default_spectral_contrast()))
          .oracle;
    case ProblemKind::kIca:
      return ica_oracle(whiten(*problem.samples).samples);
    case ProblemKind::kGmm:
      break;
  }
  fail(ErrorCode::kConfig, "gmm problems build their oracle inside the pipeline");
}

Solution solve_problem(const Problem& problem, const RecoveryConfig& config,
                       const std::optional<Perturbation>& perturbation,
                       double failure_error) {
  Solution sol;
  if (problem.kind == ProblemKind::kGmm) {
    require(!perturbation || perturbation->epsilon == 0.0, ErrorCode::kConfig,
            "gmm problems do not take a perturbation");
    std::shared_ptr<const MixtureMoments> moments;
    if (problem.population) {
      moments = population_moments(problem.gmm->weights, problem.gmm->means,
                                   problem.gmm->sigma);
    } else {
      moments = sample_moments(problem.samples);
    }
    GmmEstimate est = gmm_recover(moments, config);
    sol.recovery = est.recovery;
    sol.directions = est.means;
    sol.max_error = std::numeric_limits<double>::quiet_NaN();
    if (problem.gmm) {
      sol.match = match_means(est.means, problem.gmm->means);
      sol.max_error = sol.match->max_error;
    }
    sol.failed = sol.recovery.has_duplicates() || est.weights_flagged ||
                 (problem.gmm && !(sol.max_error <= failure_error));
    sol.gmm = std::move(est);
    return sol;
  }

  std::optional<Whitening> white;
  std::optional<GradientOracle> oracle;
  if (problem.kind == ProblemKind::kIca) {
    white = whiten(*problem.samples);
    oracle = ica_oracle(white->samples);
  } else {
    oracle = problem_oracle(problem);
  }
  if (perturbation && perturbation->epsilon > 0) {
    oracle = perturb_oracle(*oracle, perturbation->epsilon, perturbation->mode,
                            perturbation->seed);
  }
  sol.recovery = robust_gi_recovery(*oracle, config);
  sol.directions = sol.recovery.as_matrix();
  if (white) {
    for (Eigen::Index j = 0; j < sol.directions.cols(); ++j) {
      const Vector back = white->inverse * sol.directions.col(j);
      sol.directions.col(j) = back / back.norm();
    }
  }
  sol.max_error = std::numeric_limits<double>::quiet_NaN();
  if (problem.truth) {
    std::vector<UnitVector> reported;
    for (Eigen::Index j = 0; j < sol.directions.cols(); ++j) {
      reported.push_back(UnitVector::normalize(sol.directions.col(j)));
    }
    Matrix truth = *problem.truth;
    truth.colwise().normalize();
    sol.match = match_basis(reported, truth);
    sol.max_error = sol.match->max_error;
  }
  sol.failed = sol.recovery.has_duplicates() ||
               (problem.truth && !(sol.max_error <= failure_error));
  return sol;
}

Json solution_summary(const Solution& solution) {
  Json diag = Json::array();
  for (const auto& d : solution.recovery.diagnostics) {
    diag.push_back(Json{{"jumps_used", d.jumps_used},
                        {"jumps_rejected", d.jumps_rejected},
                        {"gi_steps", d.gi_steps},
                        {"residual", number_or_null(d.residual)},
                        {"grad_norm", d.grad_norm},
                        {"early_exit", d.early_exit},
                        {"duplicate", d.duplicate},
                        {"weak", d.weak}});
  }
  Json out{{"directions", matrix_columns_json(solution.directions)},
           {"max_error", number_or_null(solution.max_error)},
           {"failed", solution.failed},
           {"total_jumps", solution.recovery.total_jumps()},
           {"diagnostics", diag}};
  if (solution.match) out["match"] = to_json(*solution.match);
  if (solution.gmm) {
    const auto& g = *solution.gmm;
    out["gmm"] = Json{{"sigma", g.sigma},
                      {"means", matrix_columns_json(g.means)},
                      {"weights", std::vector<double>(g.weights.data(),
                                                      g.weights.data() +
                                                          g.weights.size())},
                      {"sign_ambiguous", g.sign_ambiguous},
                      {"weights_flagged", g.weights_flagged}};
  }
  return out;
}

}  // namespace hidden_basis
