#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "hidden_basis/contrast.hpp"
#include "hidden_basis/sphere.hpp"

namespace hidden_basis {

/// Basis encoding function F(u) = sum_i g_i(<u, Z_i>) over m orthonormal
/// hidden directions in R^d (stored as the columns of `basis()`).
class ExactBef {
 public:
  ExactBef(Matrix basis, std::vector<ContrastFunction> contrasts);

  Eigen::Index dimension() const { return basis_.rows(); }
  Eigen::Index size() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  const std::vector<ContrastFunction>& contrasts() const { return contrasts_; }
  const std::vector<HTransform>& h() const { return h_; }

  /// Combined certificate when every contrast carries one.
  std::optional<RobustnessCertificate> certificate() const;

 private:
  Matrix basis_;
  std::vector<ContrastFunction> contrasts_;
  std::vector<HTransform> h_;
};

double eval_f(const ExactBef& bef, const Vector& u);

/// sum_i g_i'(<u, Z_i>) Z_i.
Vector eval_grad(const ExactBef& bef, const Vector& u);

/// The same gradient through the h-transform: 2 sum_i h_i'(u_i^2) u_i Z_i.
Vector eval_grad_h_form(const ExactBef& bef, const Vector& u);

/// Evaluation access to a gradient field on the closed unit ball together
/// with the declared sup-norm error bound of that field. Immutable and safe
/// for concurrent evaluation.
class GradientOracle {
 public:
  using GradFn = std::function<Vector(const Vector&)>;
  using ValueFn = std::function<double(const Vector&)>;

  GradientOracle(Eigen::Index dimension, GradFn grad,
                 std::optional<ValueFn> value = std::nullopt,
                 double epsilon = 0.0);

  Vector grad(const Vector& u) const;
  bool has_value() const { return value_.has_value(); }
  double value(const Vector& u) const;

  double epsilon() const { return epsilon_; }
  Eigen::Index dimension() const { return dimension_; }

 private:
  void check(const Vector& u) const;

  Eigen::Index dimension_;
  GradFn grad_;
  std::optional<ValueFn> value_;
  double epsilon_;
};

/// Oracle evaluating the exact BEF gradient; declared epsilon is 0.
GradientOracle make_exact_oracle(std::shared_ptr<const ExactBef> bef);
GradientOracle make_exact_oracle(const ExactBef& bef);

enum class PerturbationMode { kDeterministic, kSeededRandom };

/// Adds a bounded error field of norm at most epsilon at every query.
/// kDeterministic: epsilon * sin(W u + b) / sqrt(d) with W, b drawn from the
/// seed (a smooth field). kSeededRandom: a direction drawn from an RNG keyed
/// by the seed and the bits of u, scaled to norm epsilon.
GradientOracle perturb_oracle(const GradientOracle& base, double epsilon,
                              PerturbationMode mode, std::uint64_t seed);

}  // namespace hidden_basis
