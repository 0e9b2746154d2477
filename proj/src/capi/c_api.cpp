#include "hidden_basis/hidden_basis.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

#include "hidden_basis/io.hpp"
#include "hidden_basis/iteration.hpp"
#include "hidden_basis/problem.hpp"
#include "hidden_basis/reference.hpp"
#include "hidden_basis/error.hpp"
#include "hidden_basis/seeding.hpp"

using namespace hidden_basis;

struct hb_bef {
  std::shared_ptr<const ExactBef> bef;
};
struct hb_oracle {
  GradientOracle oracle;
};
struct hb_basis {
  RecoveredBasis basis;
};
struct hb_problem {
  Problem problem;
};
struct hb_solution {
  Solution solution;
};

namespace {

thread_local std::string g_last_error;

hb_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return HB_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return HB_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kConfig: return HB_ERR_CONFIG;
    case ErrorCode::kIo: return HB_ERR_IO;
    case ErrorCode::kNumerical: return HB_ERR_NUMERICAL;
    case ErrorCode::kDegenerate: return HB_ERR_DEGENERATE;
    case ErrorCode::kNotCertified: return HB_ERR_NOT_CERTIFIED;
  }
  return HB_ERR_INTERNAL;
}

template <typename F>
hb_status guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return HB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const Json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return HB_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HB_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument,
          std::string(what) + " must not be NULL");
}

Vector read_vector(const double* data, size_t d) {
  need(data, "vector");
  return Eigen::Map<const Vector>(data, static_cast<Eigen::Index>(d));
}

void write_vector(const Vector& v, double* out) {
  need(out, "output");
  std::memcpy(out, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
}

void check_dim(size_t d, Eigen::Index expected) {
  require(static_cast<Eigen::Index>(d) == expected,
          ErrorCode::kDimensionMismatch,
          "expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(d));
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  require(out != nullptr, ErrorCode::kNumerical, "out of memory");
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

Json parse_json(const char* text, const char* what) {
  need(text, what);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kConfig, std::string(what) + ": " + e.what());
  }
}

Json vector_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

RobustnessCertificate certificate_from_json(const Json& j) {
  require(j.is_object(), ErrorCode::kConfig, "certificate: expected object");
  RobustnessCertificate c;
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.delta = j.at("delta").get<double>();
  return c;
}

SecondPhaseBound bound_from_string(const std::string& s) {
  if (s == "conservative") return SecondPhaseBound::kConservative;
  if (s == "tight") return SecondPhaseBound::kTight;
  fail(ErrorCode::kConfig, "unknown bound '" + s + "'");
}

Json theoretical_json(const TheoreticalParams& t) {
  return Json{{"config", to_json(t.config)},
              {"tau", t.tau},
              {"epsilon_bound", t.epsilon_bound},
              {"in_guarantee_regime", t.in_guarantee_regime},
              {"n_small", t.n_small},
              {"n2_conservative", t.n2_conservative},
              {"n2_tight", t.n2_tight}};
}

std::optional<RobustnessCertificate> problem_certificate(const Problem& p) {
  if (p.kind == ProblemKind::kBef) return p.bef->certificate();
  if (p.kind == ProblemKind::kTensor) {
    std::vector<RobustnessCertificate> certs;
    for (Eigen::Index k = 0; k < p.tensor->weights.size(); ++k) {
      const auto g =
          ContrastFunction::monomial(p.tensor->weights[k], p.tensor->order);
      certs.push_back(*g.certificate());
    }
    return combine_certificates(certs);
  }
  return std::nullopt;
}

RecoveryConfig resolve_config(const Problem& problem, const char* recovery_json,
                              std::optional<double> epsilon, uint64_t seed) {
  RecoveryConfig config = RecoveryConfig::practical(problem.components(), seed);
  if (recovery_json == nullptr) return config;
  Json spec = parse_json(recovery_json, "recovery config");
  if (spec.is_string()) spec = Json{{"preset", spec}};
  require(spec.is_object(), ErrorCode::kConfig,
          "recovery config: expected object or preset name");
  const std::string preset = spec.value("preset", std::string("default"));
  const double p = spec.value("failure_probability", 0.1);
  const std::string bound = spec.value("bound", std::string("conservative"));
  spec.erase("preset");
  spec.erase("failure_probability");
  spec.erase("bound");
  if (preset == "theoretical") {
    const auto cert = problem_certificate(problem);
    require(cert.has_value(), ErrorCode::kNotCertified,
            "theoretical preset needs a certified problem (bef or tensor)");
    config = theoretical_params(*cert, problem.components(),
                                static_cast<int>(problem.dimension),
                                epsilon.value_or(0.0), p,
                                bound_from_string(bound))
                 .config;
    config.seed = seed;
  } else {
    require(preset == "default", ErrorCode::kConfig,
            "recovery config: unknown preset '" + preset + "'");
  }
  return recovery_config_from_json(spec, config);
}

}  // namespace

extern "C" {

const char* hb_last_error(void) { return g_last_error.c_str(); }
const char* hb_version(void) { return "1.0.0"; }
void hb_string_free(char* s) { std::free(s); }
uint64_t hb_derive_seed(uint64_t root, uint64_t index) {
  return derive_seed(root, index);
}

hb_status hb_bef_create(const char* spec_json, hb_bef** out) {
  return guard([&] {
    need(out, "out");
    auto bef = std::make_shared<const ExactBef>(
        bef_from_json(parse_json(spec_json, "bef spec")));
    *out = new hb_bef{std::move(bef)};
  });
}

void hb_bef_destroy(hb_bef* bef) { delete bef; }

hb_status hb_bef_dims(const hb_bef* bef, size_t* d, size_t* m) {
  return guard([&] {
    need(bef, "bef");
    if (d) *d = static_cast<size_t>(bef->bef->dimension());
    if (m) *m = static_cast<size_t>(bef->bef->size());
  });
}

hb_status hb_bef_basis(const hb_bef* bef, double* out, size_t len) {
  return guard([&] {
    need(bef, "bef");
    need(out, "out");
    const Matrix& b = bef->bef->basis();
    require(len == static_cast<size_t>(b.size()), ErrorCode::kDimensionMismatch,
            "hb_bef_basis: buffer must hold d * m values");
    std::memcpy(out, b.data(), sizeof(double) * len);
  });
}

hb_status hb_bef_eval(const hb_bef* bef, const double* u, size_t d,
                      double* value, double* grad) {
  return guard([&] {
    need(bef, "bef");
    check_dim(d, bef->bef->dimension());
    const Vector x = read_vector(u, d);
    if (value) *value = eval_f(*bef->bef, x);
    if (grad) write_vector(eval_grad(*bef->bef, x), grad);
  });
}

hb_status hb_bef_oracle(const hb_bef* bef, hb_oracle** out) {
  return guard([&] {
    need(bef, "bef");
    need(out, "out");
    *out = new hb_oracle{make_exact_oracle(bef->bef)};
  });
}

hb_status hb_fixed_points(const hb_bef* bef, double tol, char** json) {
  return guard([&] {
    need(bef, "bef");
    need(json, "json");
    const GradientOracle oracle = make_exact_oracle(bef->bef);
    Json out = Json::array();
    for (const auto& fp : enumerate_fixed_points(*bef->bef, tol)) {
      const double residual =
          sign_distance(gi_step(oracle, fp.point).vec(), fp.point.vec());
      out.push_back(Json{{"support", fp.support},
                         {"point", vector_json(fp.point.vec())},
                         {"residual", residual}});
    }
    *json = dup_string(out.dump());
  });
}

hb_status hb_oracle_matrix(const double* a, size_t d, hb_oracle** out) {
  return guard([&] {
    need(a, "matrix");
    need(out, "out");
    require(d >= 1, ErrorCode::kInvalidArgument, "matrix must be non-empty");
    const auto n = static_cast<Eigen::Index>(d);
    const Matrix m =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(a, n, n);
    *out = new hb_oracle{matrix_oracle(m)};
  });
}

hb_status hb_oracle_perturb(const hb_oracle* base, double epsilon,
                            hb_perturbation_mode mode, uint64_t seed,
                            hb_oracle** out) {
  return guard([&] {
    need(base, "oracle");
    need(out, "out");
    require(mode == HB_PERTURB_DETERMINISTIC || mode == HB_PERTURB_SEEDED_RANDOM,
            ErrorCode::kInvalidArgument, "unknown perturbation mode");
    const auto m = mode == HB_PERTURB_DETERMINISTIC
                       ? PerturbationMode::kDeterministic
                       : PerturbationMode::kSeededRandom;
    *out = new hb_oracle{perturb_oracle(base->oracle, epsilon, m, seed)};
  });
}

hb_status hb_oracle_dims(const hb_oracle* oracle, size_t* d) {
  return guard([&] {
    need(oracle, "oracle");
    need(d, "d");
    *d = static_cast<size_t>(oracle->oracle.dimension());
  });
}

hb_status hb_oracle_grad(const hb_oracle* oracle, const double* u, size_t d,
                         double* grad) {
  return guard([&] {
    need(oracle, "oracle");
    check_dim(d, oracle->oracle.dimension());
    write_vector(oracle->oracle.grad(read_vector(u, d)), grad);
  });
}

void hb_oracle_destroy(hb_oracle* oracle) { delete oracle; }

hb_status hb_sample_sphere(size_t d, uint64_t seed, double* out) {
  return guard([&] {
    require(d >= 1, ErrorCode::kInvalidArgument, "dimension must be >= 1");
    Rng rng(seed);
    write_vector(sample_sphere(static_cast<Eigen::Index>(d), rng).vec(), out);
  });
}

hb_status hb_gi_step(const hb_oracle* oracle, const double* u, size_t d,
                     double* out) {
  return guard([&] {
    need(oracle, "oracle");
    check_dim(d, oracle->oracle.dimension());
    const UnitVector x(read_vector(u, d));
    write_vector(gi_step(oracle->oracle, x).vec(), out);
  });
}

hb_status hb_run_to_convergence(const hb_oracle* oracle, const double* u0,
                                size_t d, double tol, int max_steps,
                                double* limit, int* steps, int* converged,
                                double* order) {
  return guard([&] {
    need(oracle, "oracle");
    check_dim(d, oracle->oracle.dimension());
    const auto report = run_to_convergence(
        oracle->oracle, UnitVector(read_vector(u0, d)), tol, max_steps);
    if (limit) write_vector(report.limit.vec(), limit);
    if (steps) *steps = report.steps;
    if (converged) *converged = report.converged ? 1 : 0;
    if (order) {
      *order = report.estimated_order.value_or(
          std::numeric_limits<double>::quiet_NaN());
    }
  });
}

hb_status hb_gi_trace_csv(const hb_oracle* oracle, const double* u0, size_t d,
                          int n, char** csv) {
  return guard([&] {
    need(oracle, "oracle");
    need(csv, "csv");
    check_dim(d, oracle->oracle.dimension());
    const auto result =
        gi_loop(oracle->oracle, UnitVector(read_vector(u0, d)), n, true);
    std::ostringstream out;
    write_trace_csv(out, result.trace);
    *csv = dup_string(out.str());
  });
}

hb_status hb_convergence_errors(const hb_oracle* oracle, const double* basis,
                                size_t d, size_t m, const double* u0,
                                double tol, int max_steps, double* errors,
                                size_t capacity, size_t* count) {
  return guard([&] {
    need(oracle, "oracle");
    need(basis, "basis");
    need(count, "count");
    check_dim(d, oracle->oracle.dimension());
    const Matrix b = Eigen::Map<const Matrix>(
        basis, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
    const auto errs = convergence_errors(
        oracle->oracle, b, UnitVector(read_vector(u0, d)), tol, max_steps);
    *count = errs.size();
    require(errs.size() <= capacity, ErrorCode::kInvalidArgument,
            "hb_convergence_errors: buffer too small");
    need(errors, "errors");
    std::copy(errs.begin(), errs.end(), errors);
  });
}

hb_status hb_estimate_convergence_order(const double* errors, size_t n,
                                        double* order) {
  return guard([&] {
    need(errors, "errors");
    need(order, "order");
    *order = estimate_convergence_order(std::vector<double>(errors, errors + n));
  });
}

hb_status hb_recover(const hb_oracle* oracle, const char* config_json,
                     hb_basis** out) {
  return guard([&] {
    need(oracle, "oracle");
    need(out, "out");
    RecoveryConfig config;
    config.m_hat = static_cast<int>(oracle->oracle.dimension());
    config.i_max = 10 * config.m_hat;
    if (config_json) {
      config = recovery_config_from_json(parse_json(config_json, "recovery config"),
                                         config);
    }
    *out = new hb_basis{robust_gi_recovery(oracle->oracle, config)};
  });
}

hb_status hb_basis_dims(const hb_basis* basis, size_t* k, size_t* d) {
  return guard([&] {
    need(basis, "basis");
    const auto& dirs = basis->basis.directions;
    if (k) *k = dirs.size();
    if (d) *d = dirs.empty() ? 0 : static_cast<size_t>(dirs.front().dim());
  });
}

hb_status hb_basis_direction(const hb_basis* basis, size_t i, double* out,
                             size_t d) {
  return guard([&] {
    need(basis, "basis");
    const auto& dirs = basis->basis.directions;
    require(i < dirs.size(), ErrorCode::kInvalidArgument,
            "hb_basis_direction: index out of range");
    check_dim(d, dirs[i].dim());
    write_vector(dirs[i].vec(), out);
  });
}

hb_status hb_basis_summary(const hb_basis* basis, char** json) {
  return guard([&] {
    need(basis, "basis");
    need(json, "json");
    Solution s;
    s.recovery = basis->basis;
    s.directions = basis->basis.as_matrix();
    s.max_error = std::numeric_limits<double>::quiet_NaN();
    *json = dup_string(solution_summary(s).dump());
  });
}

void hb_basis_destroy(hb_basis* basis) { delete basis; }

hb_status hb_match(const hb_basis* basis, const double* truth, size_t d,
                   size_t m, char** report_json) {
  return guard([&] {
    need(basis, "basis");
    need(truth, "truth");
    need(report_json, "report_json");
    const Matrix t = Eigen::Map<const Matrix>(
        truth, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
    *report_json =
        dup_string(to_json(match_basis(basis->basis.directions, t)).dump());
  });
}

hb_status hb_theoretical_config(const char* cert_json, int m, int d,
                                double epsilon, double failure_probability,
                                const char* bound, char** json) {
  return guard([&] {
    need(json, "json");
    const auto cert = certificate_from_json(parse_json(cert_json, "certificate"));
    const auto params =
        theoretical_params(cert, m, d, epsilon, failure_probability,
                           bound_from_string(bound ? bound : "conservative"));
    *json = dup_string(theoretical_json(params).dump());
  });
}

hb_status hb_problem_create(const char* generator_json, uint64_t seed,
                            hb_problem** out) {
  return guard([&] {
    need(out, "out");
    *out = new hb_problem{
        make_problem(parse_json(generator_json, "generator"), seed)};
  });
}

hb_status hb_problem_from_csv(const char* path, const char* kind,
                              hb_problem** out) {
  return guard([&] {
    need(path, "path");
    need(kind, "kind");
    need(out, "out");
    *out = new hb_problem{
        problem_from_samples(problem_kind_from_string(kind), read_samples_csv(path))};
  });
}

hb_status hb_problem_info(const hb_problem* problem, char** json) {
  return guard([&] {
    need(problem, "problem");
    need(json, "json");
    const Problem& p = problem->problem;
    Json out{{"kind", to_string(p.kind)},
             {"dimension", p.dimension},
             {"components", p.components()},
             {"has_truth", p.truth.has_value() || p.gmm.has_value()},
             {"samples", p.samples ? p.samples->rows() : 0}};
    *json = dup_string(out.dump());
  });
}

hb_status hb_problem_write_samples_csv(const hb_problem* problem,
                                       const char* path) {
  return guard([&] {
    need(problem, "problem");
    need(path, "path");
    require(problem->problem.samples != nullptr, ErrorCode::kConfig,
            "problem has no samples to write");
    write_samples_csv(path, *problem->problem.samples);
  });
}

void hb_problem_destroy(hb_problem* problem) { delete problem; }

hb_status hb_problem_solve(const hb_problem* problem, const char* recovery_json,
                           const char* perturbation_json, uint64_t seed,
                           double failure_error, hb_solution** out) {
  return guard([&] {
    need(problem, "problem");
    need(out, "out");
    std::optional<Perturbation> perturbation;
    if (perturbation_json) {
      perturbation =
          perturbation_from_json(parse_json(perturbation_json, "perturbation"));
    }
    std::optional<double> eps;
    if (perturbation) eps = perturbation->epsilon;
    const RecoveryConfig config =
        resolve_config(problem->problem, recovery_json, eps, seed);
    *out = new hb_solution{solve_problem(
        problem->problem, config, perturbation,
        failure_error > 0 ? failure_error : kDefaultFailureError)};
  });
}

hb_status hb_solution_max_error(const hb_solution* s, double* error) {
  return guard([&] {
    need(s, "solution");
    need(error, "error");
    *error = s->solution.max_error;
  });
}

hb_status hb_solution_failed(const hb_solution* s, int* failed) {
  return guard([&] {
    need(s, "solution");
    need(failed, "failed");
    *failed = s->solution.failed ? 1 : 0;
  });
}

hb_status hb_solution_total_jumps(const hb_solution* s, int* jumps) {
  return guard([&] {
    need(s, "solution");
    need(jumps, "jumps");
    *jumps = s->solution.recovery.total_jumps();
  });
}

hb_status hb_solution_summary(const hb_solution* s, char** json) {
  return guard([&] {
    need(s, "solution");
    need(json, "json");
    *json = dup_string(solution_summary(s->solution).dump());
  });
}

void hb_solution_destroy(hb_solution* s) { delete s; }

}  // extern "C"
