#pragma once

#include <Eigen/Core>
#include <random>
#include <vector>

namespace hidden_basis {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline constexpr double kUnitTol = 1e-9;
inline constexpr double kTangentTol = 1e-9;
inline constexpr double kOrthonormalTol = 1e-10;

/// A point of S^{d-1}. Construction checks the norm; `normalize` rescales.
class UnitVector {
 public:
  explicit UnitVector(Vector coords);
  static UnitVector normalize(const Vector& v);
  static UnitVector basis(Eigen::Index d, Eigen::Index i);

  const Vector& vec() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }
  double operator[](Eigen::Index i) const { return coords_[i]; }
  UnitVector operator-() const;

 private:
  struct Trusted {};
  UnitVector(Vector coords, Trusted) : coords_(std::move(coords)) {}
  Vector coords_;
};

/// A vector in the tangent space p^perp of the sphere at `base`.
class TangentVector {
 public:
  TangentVector(UnitVector base, Vector direction);

  const UnitVector& base() const { return base_; }
  const Vector& direction() const { return direction_; }

 private:
  UnitVector base_;
  Vector direction_;
};

/// exp_p(x) = p cos|x| + (x/|x|) sin|x|, with exp_p(0) = p.
UnitVector exp_map(const TangentVector& x);

/// Uniform point of radius*S^{d-1} intersected with p^perp: a standard normal
/// draw projected onto p^perp and rescaled.
TangentVector sample_tangent_sphere(const UnitVector& p, double radius,
                                    Rng& rng);

/// Uniform random point of S^{d-1}.
UnitVector sample_sphere(Eigen::Index d, Rng& rng);

/// sum_{i in index_set} <u, Z_i> Z_i; `basis` holds the Z_i as columns.
Vector project_coords(const Vector& u, const std::vector<int>& index_set,
                      const Matrix& basis);

/// Orthonormal basis (as columns) of the orthogonal complement of the span of
/// the given columns. Modified Gram-Schmidt against the inputs and the
/// canonical vectors, with a second re-orthogonalization pass.
Matrix orthonormal_complement(const Matrix& vectors);

/// Completes k orthonormal columns to a full orthonormal basis of R^d.
Matrix complete_basis(const Matrix& basis);

/// Distance between sign-flip equivalence classes:
/// || sum |v_i| Z_i - sum |u_i| Z_i ||. A partial basis is completed first.
double class_distance(const Vector& u, const Vector& v, const Matrix& basis);

/// min(|u - v|, |u + v|).
double sign_distance(const Vector& u, const Vector& v);

/// Random orthogonal d x d matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_rotation(Eigen::Index d, Rng& rng);

}  // namespace hidden_basis
