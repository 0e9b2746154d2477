#include "hidden_basis/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>

#include "hidden_basis/error.hpp"

namespace hidden_basis {

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  const Eigen::Index d = trace.states.empty() ? 0 : trace.states.front().size();
  out << "step";
  for (Eigen::Index i = 0; i < d; ++i) out << ",u_" << i;
  out << ",grad_norm\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << trace.states[k][i];
    out << ',';
    if (k < trace.grad_norms.size()) out << trace.grad_norms[k];
    out << '\n';
  }
}

UnitVector gi_step(const GradientOracle& oracle, const UnitVector& u,
                   double zero_grad_tol) {
  const Vector g = oracle.grad(u.vec());
  const double norm = g.norm();
  if (norm <= zero_grad_tol) return u;
  return UnitVector::normalize(g);
}

GiLoopResult gi_loop(const GradientOracle& oracle, const UnitVector& u0,
                     int n, bool record_trace, std::optional<double> stop_tol) {
  require(n >= 0, ErrorCode::kInvalidArgument, "gi_loop: n must be >= 0");
  GiLoopResult result{u0, {}, 0, std::numeric_limits<double>::infinity()};
  if (record_trace) result.trace.states.push_back(u0.vec());
  UnitVector u = u0;
  for (int k = 0; k < n; ++k) {
    const Vector g = oracle.grad(u.vec());
    const double norm = g.norm();
    UnitVector next = norm <= kZeroGradTol ? u : UnitVector::normalize(g);
    result.last_residual = sign_distance(next.vec(), u.vec());
    u = std::move(next);
    ++result.steps_taken;
    if (record_trace) {
      result.trace.grad_norms.push_back(norm);
      result.trace.states.push_back(u.vec());
    }
    if (stop_tol && result.last_residual <= *stop_tol) break;
  }
  result.state = u;
  return result;
}

ConvergenceReport run_to_convergence(const GradientOracle& oracle,
                                     const UnitVector& u0, double tol,
                                     int max_steps) {
  require(tol > 0, ErrorCode::kInvalidArgument,
          "run_to_convergence: tol must be positive");
  require(max_steps >= 0, ErrorCode::kInvalidArgument,
          "run_to_convergence: max_steps must be >= 0");
  ConvergenceReport report{false, u0, 0,
                           std::numeric_limits<double>::infinity(),
                           std::nullopt};
  std::vector<double> residuals;
  UnitVector u = u0;
  for (int step = 0; step < max_steps; ++step) {
    UnitVector next = gi_step(oracle, u);
    const double residual = sign_distance(next.vec(), u.vec());
    residuals.push_back(residual);
    u = std::move(next);
    report.steps = step + 1;
    report.final_residual = residual;
    if (residual <= tol) {
      report.converged = true;
      break;
    }
  }
  report.limit = u;
  if (residuals.size() >= 4) {
    try {
      report.estimated_order = estimate_convergence_order(residuals);
    } catch (const Error&) {
      // Too few residuals above the noise floor; leave the order unset.
    }
  }
  return report;
}

UnitVector adaptive_ascent_step(const GradientOracle& oracle,
                                const UnitVector& u) {
  const Vector g = oracle.grad(u.vec());
  const double norm = g.norm();
  if (norm <= kZeroGradTol) return u;
  const double inner = u.vec().dot(g);
  require(std::abs(inner) > kZeroGradTol * norm, ErrorCode::kNumerical,
          "adaptive_ascent_step: gradient is orthogonal to u");
  const double eta = 1.0 / inner;
  const Vector tangent = g - inner * u.vec();
  const Vector ascended = u.vec() + eta * tangent;
  return UnitVector::normalize(ascended / (norm * eta));
}

namespace {

// Inverse of t -> |h'(t)| on [0, 1] by bisection; saturates at 1.
double inverse_slope(const HTransform& h, double level) {
  if (level <= 0.0) return 0.0;
  if (std::abs(h.first(1.0)) <= level) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (std::abs(h.first(mid)) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

UnitVector fixed_point_for_support(const ExactBef& bef,
                                   const std::vector<int>& support,
                                   double tol) {
  require(!support.empty(), ErrorCode::kInvalidArgument,
          "fixed_point_for_support: empty support");
  require(tol > 0, ErrorCode::kInvalidArgument,
          "fixed_point_for_support: tol must be positive");
  const std::set<int> unique(support.begin(), support.end());
  require(unique.size() == support.size(), ErrorCode::kInvalidArgument,
          "fixed_point_for_support: repeated index");
  std::vector<const HTransform*> hs;
  for (int i : support) {
    require(i >= 0 && i < bef.size(), ErrorCode::kInvalidArgument,
            "fixed_point_for_support: index out of range");
    const auto& h = bef.h()[static_cast<std::size_t>(i)];
    const bool certified = h.source().certificate().has_value() ||
                           h.first_derivative_monotone();
    require(certified, ErrorCode::kNotCertified,
            "fixed_point_for_support: contrast '" + h.source().name() +
                "' has no monotone h'");
    hs.push_back(&h);
  }
  if (support.size() == 1) {
    return UnitVector::normalize(bef.basis().col(support.front()));
  }

  const std::size_t k = support.size();
  auto slope = [&](std::size_t j, double t) { return std::abs(hs[j]->first(t)); };

  // Greedy allocation of squared mass to the coordinate with smallest slope.
  const int pieces = 256 * static_cast<int>(k);
  std::vector<double> mass(k, 0.0);
  for (int step = 0; step < pieces; ++step) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (slope(j, mass[j]) < slope(best, mass[best])) best = j;
    }
    mass[best] += 1.0 / pieces;
  }

  auto total_mass = [&](double level) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += inverse_slope(*hs[j], level);
    return sum;
  };
  double lo = slope(0, mass[0]);
  double hi = lo;
  for (std::size_t j = 1; j < k; ++j) {
    lo = std::min(lo, slope(j, mass[j]));
    hi = std::max(hi, slope(j, mass[j]));
  }
  if (total_mass(lo) > 1.0) lo = 0.0;
  if (total_mass(hi) < 1.0) {
    for (std::size_t j = 0; j < k; ++j) hi = std::max(hi, slope(j, 1.0));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (total_mass(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double level = 0.5 * (lo + hi);

  Vector coords = Vector::Zero(bef.size());
  for (std::size_t j = 0; j < k; ++j) {
    coords[support[j]] = std::sqrt(inverse_slope(*hs[j], level));
  }
  coords /= coords.norm();

  double spread = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const double sa = slope(a, coords[support[a]] * coords[support[a]]);
      const double sb = slope(b, coords[support[b]] * coords[support[b]]);
      spread = std::max(spread, std::abs(sa - sb));
    }
  }
  require(spread <= tol, ErrorCode::kNumerical,
          "fixed_point_for_support: level residual above tolerance");
  return UnitVector::normalize(bef.basis() * coords);
}

std::vector<double> convergence_errors(const GradientOracle& oracle,
                                       const Matrix& basis,
                                       const UnitVector& u0, double tol,
                                       int max_steps) {
  require(basis.rows() == oracle.dimension() && basis.cols() >= 1,
          ErrorCode::kDimensionMismatch, "convergence_errors: bad basis");
  require(tol > 0 && max_steps >= 1, ErrorCode::kInvalidArgument,
          "convergence_errors: need tol > 0 and max_steps >= 1");
  std::vector<Vector> states{u0.vec()};
  UnitVector u = u0;
  for (int step = 0; step < max_steps; ++step) {
    UnitVector next = gi_step(oracle, u);
    const double residual = sign_distance(next.vec(), u.vec());
    u = std::move(next);
    states.push_back(u.vec());
    if (residual <= tol) break;
  }
  Eigen::Index nearest = 0;
  (basis.transpose() * u.vec()).cwiseAbs().maxCoeff(&nearest);
  const Vector target = basis.col(nearest);
  std::vector<double> errors;
  errors.reserve(states.size());
  for (const auto& s : states) errors.push_back(class_distance(s, target, basis));
  return errors;
}

double estimate_convergence_order(const std::vector<double>& errors) {
  constexpr double kNoiseFloor = 1e-13;
  require(errors.size() >= 4, ErrorCode::kInvalidArgument,
          "estimate_convergence_order: need at least 4 errors");
  std::vector<double> usable;
  for (double e : errors) {
    require(e >= 0 && std::isfinite(e), ErrorCode::kInvalidArgument,
            "estimate_convergence_order: errors must be finite and >= 0");
    if (e <= kNoiseFloor) break;
    usable.push_back(e);
  }
  require(usable.size() >= 3, ErrorCode::kInvalidArgument,
          "estimate_convergence_order: too few errors above the noise floor");
  const std::size_t first = usable.size() > 4 ? usable.size() - 4 : 0;
  std::vector<double> xs, ys;
  for (std::size_t i = first; i + 1 < usable.size(); ++i) {
    xs.push_back(std::log(usable[i]));
    ys.push_back(std::log(usable[i + 1]));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  require(sxx > 0, ErrorCode::kNumerical,
          "estimate_convergence_order: errors do not vary");
  return sxy / sxx;
}

}  // namespace hidden_basis
