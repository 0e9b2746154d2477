#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "hidden_basis/bef.hpp"

namespace hidden_basis {

inline constexpr double kZeroGradTol = 1e-14;

/// States u(0..n) and |grad F(u(k))| for the states whose gradient was taken.
struct IterationTrace {
  std::vector<Vector> states;
  std::vector<double> grad_norms;
  std::vector<double> class_dists_to_limit;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

/// CSV with header `step,u_0,...,u_{d-1},grad_norm`; grad_norm is empty for
/// the final state when it was never queried.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

struct ConvergenceReport {
  bool converged = false;
  UnitVector limit;
  int steps = 0;
  /// min(|G(u) - u|, |G(u) + u|) for the last iterate u that was stepped.
  double final_residual = 0.0;
  std::optional<double> estimated_order;
};

/// G(u) = grad F(u) / |grad F(u)|, or u itself when |grad F(u)| <= zero_tol.
UnitVector gi_step(const GradientOracle& oracle, const UnitVector& u,
                   double zero_grad_tol = kZeroGradTol);

struct GiLoopResult {
  UnitVector state;
  IterationTrace trace;
  int steps_taken = 0;
  /// Sign-symmetric residual of the last step, or +inf when n == 0.
  double last_residual = 0.0;
};

/// n applications of G. When `stop_tol` is set the loop ends as soon as a
/// step moves the iterate by at most stop_tol (up to sign).
GiLoopResult gi_loop(const GradientOracle& oracle, const UnitVector& u0,
                     int n, bool record_trace = true,
                     std::optional<double> stop_tol = std::nullopt);

ConvergenceReport run_to_convergence(const GradientOracle& oracle,
                                     const UnitVector& u0, double tol = 1e-10,
                                     int max_steps = 1000);

/// Projected gradient ascent with the adaptive step eta = 1/<u, grad F(u)>:
/// (u + eta P_{u^perp} grad F(u)) / (|grad F(u)| eta). Agrees with gi_step.
UnitVector adaptive_ascent_step(const GradientOracle& oracle,
                                const UnitVector& u);

/// The unique positive-orthant fixed point supported on `support` (indices
/// into the BEF's basis): all |h_i'(v_i^2)| equal across the support.
/// Greedy mass allocation followed by bisection on the common level.
UnitVector fixed_point_for_support(const ExactBef& bef,
                                   const std::vector<int>& support,
                                   double tol = 1e-12);

/// Iterates G from u0 until a step moves by at most tol (or max_steps) and
/// returns the class distance of every iterate, u0 included, to the basis
/// column nearest the last iterate.
std::vector<double> convergence_errors(const GradientOracle& oracle,
                                       const Matrix& basis,
                                       const UnitVector& u0, double tol,
                                       int max_steps);

/// Least-squares slope of log e_{n+1} against log e_n over the last (up to
/// three) consecutive pairs of errors above the 1e-13 noise floor.
double estimate_convergence_order(const std::vector<double>& errors);

}  // namespace hidden_basis
