#include "hidden_basis/recovery.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>

#include "hidden_basis/error.hpp"
#include "hidden_basis/seeding.hpp"

namespace hidden_basis {
namespace {

// Two converged rounds count as the same point below this sign distance.
constexpr double kSamePointTol = 1e-6;

bool repeats_found(const UnitVector& u, const std::vector<UnitVector>& found) {
  for (const auto& mu : found) {
    if (std::abs(u.vec().dot(mu.vec())) > kDuplicateThreshold) return true;
  }
  return false;
}

int saturate(long long n) {
  return n > INT_MAX ? INT_MAX : static_cast<int>(std::max(1LL, n));
}

long long ceil_count(double x) {
  if (!(x > 0)) return 0;
  if (x >= 9.0e18) return std::numeric_limits<long long>::max();
  return static_cast<long long>(std::ceil(x));
}

}  // namespace

void RecoveryConfig::validate(Eigen::Index dimension) const {
  require(sigma > 0 && std::isfinite(sigma), ErrorCode::kConfig,
          "RecoveryConfig: sigma must be positive");
  require(n1 >= 0, ErrorCode::kConfig, "RecoveryConfig: n1 must be >= 0");
  require(n2 >= 1, ErrorCode::kConfig, "RecoveryConfig: n2 must be >= 1");
  require(i_max >= 1, ErrorCode::kConfig,
          "RecoveryConfig: i_max must be >= 1");
  require(m_hat >= 1 && m_hat <= dimension, ErrorCode::kConfig,
          "RecoveryConfig: m_hat must lie in [1, d]");
  require(tol > 0, ErrorCode::kConfig, "RecoveryConfig: tol must be positive");
  require(early_exit_rounds >= 1, ErrorCode::kConfig,
          "RecoveryConfig: early_exit_rounds must be >= 1");
  require(weak_gradient_ratio >= 0, ErrorCode::kConfig,
          "RecoveryConfig: weak_gradient_ratio must be >= 0");
}

RecoveryConfig RecoveryConfig::practical(int m, std::uint64_t seed) {
  RecoveryConfig config;
  config.m_hat = m;
  config.i_max = 10 * m;
  config.seed = seed;
  return config;
}

Matrix RecoveredBasis::as_matrix() const {
  if (directions.empty()) return Matrix();
  Matrix out(directions.front().dim(),
             static_cast<Eigen::Index>(directions.size()));
  for (std::size_t i = 0; i < directions.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = directions[i].vec();
  }
  return out;
}

int RecoveredBasis::total_jumps() const {
  int total = 0;
  for (const auto& d : diagnostics) total += d.jumps_used;
  return total;
}

bool RecoveredBasis::has_duplicates() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const DirectionDiagnostics& d) { return d.duplicate; });
}

FoundElement find_basis_element(const GradientOracle& oracle,
                                const std::vector<UnitVector>& found,
                                const RecoveryConfig& config, Rng& rng) {
  const Eigen::Index d = oracle.dimension();
  require(static_cast<Eigen::Index>(found.size()) < d,
          ErrorCode::kInvalidArgument,
          "find_basis_element: found set already spans the space");
  config.validate(d);

  Matrix spanned(d, static_cast<Eigen::Index>(found.size()));
  for (std::size_t i = 0; i < found.size(); ++i) {
    require(found[i].dim() == d, ErrorCode::kDimensionMismatch,
            "find_basis_element: found direction has wrong dimension");
    spanned.col(static_cast<Eigen::Index>(i)) = found[i].vec();
  }
  const Matrix candidates = orthonormal_complement(spanned);

  // Start from the complement vector with the largest gradient.
  Eigen::Index best = 0;
  double best_norm = -1.0;
  for (Eigen::Index i = 0; i < candidates.cols(); ++i) {
    const double norm = oracle.grad(candidates.col(i)).norm();
    if (norm > best_norm) {
      best_norm = norm;
      best = i;
    }
  }

  const bool practical = !config.strict_paper;
  const std::optional<double> stop =
      practical ? std::optional<double>(config.tol) : std::nullopt;

  DirectionDiagnostics diag;
  UnitVector u = gi_step(oracle, UnitVector::normalize(candidates.col(best)));
  GiLoopResult warm = gi_loop(oracle, u, config.n1, false, stop);
  u = warm.state;
  diag.gi_steps = 1 + warm.steps_taken;
  diag.residual = warm.steps_taken > 0 ? warm.last_residual : 0.0;
  if (config.record_trace) diag.accepted_iterates.push_back(u.vec());

  int streak = 0;
  for (int round = 0; round < config.i_max; ++round) {
    const TangentVector jump = sample_tangent_sphere(u, config.sigma, rng);
    GiLoopResult loop = gi_loop(oracle, exp_map(jump), config.n2, false, stop);
    diag.gi_steps += loop.steps_taken;
    if (practical && repeats_found(loop.state, found)) {
      ++diag.jumps_rejected;
      continue;
    }
    const double moved = sign_distance(loop.state.vec(), u.vec());
    u = loop.state;
    diag.residual = loop.last_residual;
    ++diag.jumps_used;
    if (config.record_trace) diag.accepted_iterates.push_back(u.vec());
    if (!practical) continue;
    if (loop.last_residual <= config.tol) {
      streak = moved <= kSamePointTol ? streak + 1 : 1;
    } else {
      streak = 0;
    }
    if (streak >= config.early_exit_rounds) {
      diag.early_exit = true;
      break;
    }
  }

  diag.grad_norm = oracle.grad(u.vec()).norm();
  diag.duplicate = repeats_found(u, found);
  return FoundElement{u, std::move(diag)};
}

RecoveredBasis robust_gi_recovery(const GradientOracle& oracle,
                                  const RecoveryConfig& config) {
  config.validate(oracle.dimension());
  RecoveredBasis out;
  for (int k = 0; k < config.m_hat; ++k) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(k)));
    FoundElement next = find_basis_element(oracle, out.directions, config, rng);
    out.directions.push_back(std::move(next.direction));
    out.diagnostics.push_back(std::move(next.diagnostics));
  }
  double largest = 0.0;
  for (const auto& d : out.diagnostics) largest = std::max(largest, d.grad_norm);
  for (auto& d : out.diagnostics) {
    d.weak = d.grad_norm <= config.weak_gradient_ratio * largest;
  }
  return out;
}

TheoreticalParams theoretical_params(const RobustnessCertificate& cert, int m,
                                     int d, double epsilon,
                                     double failure_probability,
                                     SecondPhaseBound bound) {
  require(cert.is_consistent(), ErrorCode::kInvalidArgument,
          "theoretical_params: inconsistent certificate");
  require(m >= 1 && d >= 2 && m <= d, ErrorCode::kInvalidArgument,
          "theoretical_params: need 1 <= m <= d and d >= 2");
  require(epsilon >= 0, ErrorCode::kInvalidArgument,
          "theoretical_params: epsilon must be >= 0");
  require(failure_probability > 0 && failure_probability < 1,
          ErrorCode::kInvalidArgument,
          "theoretical_params: failure probability must lie in (0, 1)");

  const double a = cert.alpha, b = cert.beta, g = cert.gamma, dl = cert.delta;
  const double md = static_cast<double>(m);
  const double dd = static_cast<double>(d);
  const double eps = std::max(epsilon, 1e-16);
  const double cond = (a * dl) / (b * g);  // >= 1
  const double log_base = std::log(1.0 + 2.0 * g);

  TheoreticalParams out;
  out.tau = std::pow(b * g / (16.0 * a * dl) * std::pow(md, -dl), 1.0 / (2.0 * g));
  const double tau2 = out.tau * out.tau;
  const double sigma = tau2 / (6.0 * std::sqrt(2.0 * dd * (1.0 + 2.0 * dl)));

  const double small_arg = std::log2(b * g / (8.0 * a * dl)) +
                           2.0 * g * std::log2(b / (4.0 * dl * eps));
  out.n_small = small_arg > 1.0
                    ? std::max(1LL, ceil_count(std::log(small_arg) / log_base))
                    : 1LL;

  const double eta = sigma / std::sqrt(dd) *
                     std::pow(b * g / (a * dl * std::pow(md, dl)), 1.0 / g) *
                     tau2;
  const double spread =
      3.0 / (2.0 * eta) * std::pow(cond, dl / g) *
      std::pow(md, dl / g * (dl - g)) *
      (std::log(4.0 * cond) / g + dl / g * std::log(md));
  const long long n_spread = ceil_count(spread) + 2 * out.n_small;
  out.n2_conservative = 2 * out.n_small + n_spread;

  const double tight_spread =
      std::pow(4.0, 2.0 / g) * std::sqrt(dd) / sigma *
      std::pow(cond, (dl + 2.0) / g) * std::pow(md, dl / g * (dl - g + 2.0)) *
      (std::log(cond) / g + dl / g * std::log(md));
  const double tight_small = std::log2(b / (dl * eps));
  const long long tight_small_n =
      tight_small > 1.0 ? ceil_count(std::log(tight_small) / log_base) : 0;
  out.n2_tight = std::max(1LL, ceil_count(tight_spread) + tight_small_n);

  out.epsilon_bound =
      std::pow(4.0, -(4.0 + 2.0 * dl) / g) * sigma * b / dl *
      std::pow(1.0 / cond, (4.0 * dl + 7.0) / (2.0 * g)) *
      std::pow(md, -dl / g * (2.0 * dl - g + 3.5)) *
      std::pow(dd, -0.5 - dl);
  out.in_guarantee_regime = epsilon <= out.epsilon_bound;

  RecoveryConfig& config = out.config;
  config.sigma = sigma;
  config.n1 = saturate(2 * out.n_small);
  config.n2 = saturate(bound == SecondPhaseBound::kConservative ? out.n2_conservative
                                                               : out.n2_tight);
  config.i_max = saturate(
      8LL * m * ceil_count(std::log(md / failure_probability)));
  config.m_hat = m;
  return out;
}

MatchReport match_basis(const std::vector<UnitVector>& recovered,
                        const Matrix& truth) {
  require(!recovered.empty(), ErrorCode::kInvalidArgument,
          "match_basis: nothing to match");
  const std::size_t k = recovered.size();
  const Eigen::Index m = truth.cols();
  for (const auto& mu : recovered) {
    require(mu.dim() == truth.rows(), ErrorCode::kDimensionMismatch,
            "match_basis: dimension mismatch");
  }

  MatchReport report;
  report.permutation.assign(k, -1);
  report.signs.assign(k, 1);
  report.errors.assign(k, std::numeric_limits<double>::quiet_NaN());

  Matrix overlap(static_cast<Eigen::Index>(k), m);
  for (std::size_t i = 0; i < k; ++i) {
    overlap.row(static_cast<Eigen::Index>(i)) =
        (truth.transpose() * recovered[i].vec()).transpose();
  }
  std::vector<bool> row_used(k, false);
  std::vector<bool> col_used(static_cast<std::size_t>(m), false);
  const std::size_t pairs = std::min(k, static_cast<std::size_t>(m));
  for (std::size_t step = 0; step < pairs; ++step) {
    double best = -1.0;
    std::size_t bi = 0;
    Eigen::Index bj = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (row_used[i]) continue;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (col_used[static_cast<std::size_t>(j)]) continue;
        const double v = std::abs(overlap(static_cast<Eigen::Index>(i), j));
        if (v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = true;
    col_used[static_cast<std::size_t>(bj)] = true;
    const int sign = overlap(static_cast<Eigen::Index>(bi), bj) < 0 ? -1 : 1;
    report.permutation[bi] = static_cast<int>(bj);
    report.signs[bi] = sign;
    report.errors[bi] = (sign * recovered[bi].vec() - truth.col(bj)).norm();
    report.max_error = std::max(report.max_error, report.errors[bi]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!row_used[i]) report.unmatched.push_back(static_cast<int>(i));
  }
  return report;
}

}  // namespace hidden_basis
