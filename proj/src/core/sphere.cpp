#include "hidden_basis/sphere.hpp"

#include <Eigen/QR>
#include <cmath>
#include <sstream>

#include "hidden_basis/error.hpp"

namespace hidden_basis {

UnitVector::UnitVector(Vector coords) : coords_(std::move(coords)) {
  const double norm = coords_.norm();
  if (!(std::abs(norm - 1.0) <= kUnitTol)) {
    std::ostringstream msg;
    msg << "UnitVector: norm " << norm << " is not 1";
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
}

UnitVector UnitVector::normalize(const Vector& v) {
  const double norm = v.norm();
  require(norm > 0 && std::isfinite(norm), ErrorCode::kNumerical,
          "UnitVector::normalize: zero or non-finite vector");
  return UnitVector(v / norm, Trusted{});
}

UnitVector UnitVector::basis(Eigen::Index d, Eigen::Index i) {
  require(i >= 0 && i < d, ErrorCode::kInvalidArgument,
          "UnitVector::basis: index out of range");
  return UnitVector(Vector::Unit(d, i), Trusted{});
}

UnitVector UnitVector::operator-() const {
  return UnitVector(-coords_, Trusted{});
}

TangentVector::TangentVector(UnitVector base, Vector direction)
    : base_(std::move(base)), direction_(std::move(direction)) {
  require(direction_.size() == base_.dim(), ErrorCode::kDimensionMismatch,
          "TangentVector: dimension mismatch");
  const double inner = std::abs(base_.vec().dot(direction_));
  require(inner <= kTangentTol * std::max(1.0, direction_.norm()),
          ErrorCode::kInvalidArgument,
          "TangentVector: direction is not tangent to the base point");
}

UnitVector exp_map(const TangentVector& x) {
  const Vector& p = x.base().vec();
  const double len = x.direction().norm();
  if (len == 0.0) return x.base();
  return UnitVector::normalize(p * std::cos(len) +
                               x.direction() * (std::sin(len) / len));
}

TangentVector sample_tangent_sphere(const UnitVector& p, double radius,
                                    Rng& rng) {
  require(radius > 0, ErrorCode::kInvalidArgument,
          "sample_tangent_sphere: radius must be positive");
  const Eigen::Index d = p.dim();
  require(d >= 2, ErrorCode::kInvalidArgument,
          "sample_tangent_sphere: dimension must be >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
    z -= p.vec() * p.vec().dot(z);
    // Second pass keeps tangency at the 1e-16 level.
    z -= p.vec() * p.vec().dot(z);
    const double norm = z.norm();
    if (norm > 1e-12) return TangentVector(p, z * (radius / norm));
  }
}

UnitVector sample_sphere(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
    if (z.norm() > 1e-12) return UnitVector::normalize(z);
  }
}

Vector project_coords(const Vector& u, const std::vector<int>& index_set,
                      const Matrix& basis) {
  require(u.size() == basis.rows(), ErrorCode::kDimensionMismatch,
          "project_coords: dimension mismatch");
  Vector out = Vector::Zero(u.size());
  for (int i : index_set) {
    require(i >= 0 && i < basis.cols(), ErrorCode::kInvalidArgument,
            "project_coords: index out of range");
    out += basis.col(i) * basis.col(i).dot(u);
  }
  return out;
}

namespace {

// Removes the components of v along the first `count` columns of q.
void orthogonalize(Vector& v, const Matrix& q, Eigen::Index count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < count; ++j) v -= q.col(j) * q.col(j).dot(v);
  }
}

}  // namespace

Matrix orthonormal_complement(const Matrix& vectors) {
  const Eigen::Index d = vectors.rows();
  const Eigen::Index k = vectors.cols();
  require(d >= 1, ErrorCode::kInvalidArgument,
          "orthonormal_complement: empty ambient space");
  require(k < d, ErrorCode::kInvalidArgument,
          "orthonormal_complement: need fewer than d input vectors");

  Matrix q(d, d);
  Eigen::Index filled = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector v = vectors.col(j);
    const double scale = v.norm();
    require(scale > 0, ErrorCode::kNumerical,
            "orthonormal_complement: zero input vector");
    orthogonalize(v, q, filled);
    require(v.norm() > 1e-8 * scale, ErrorCode::kNumerical,
            "orthonormal_complement: input vectors are rank deficient");
    q.col(filled++) = v.normalized();
  }
  for (Eigen::Index i = 0; i < d && filled < d; ++i) {
    Vector v = Vector::Unit(d, i);
    orthogonalize(v, q, filled);
    // Canonical seeds nearly inside the current span are skipped.
    if (v.norm() > 1e-6) q.col(filled++) = v.normalized();
  }
  require(filled == d, ErrorCode::kNumerical,
          "orthonormal_complement: failed to span the ambient space");
  return q.rightCols(d - k);
}

Matrix complete_basis(const Matrix& basis) {
  if (basis.cols() == basis.rows()) return basis;
  Matrix full(basis.rows(), basis.rows());
  full << basis, orthonormal_complement(basis);
  return full;
}

double class_distance(const Vector& u, const Vector& v, const Matrix& basis) {
  require(u.size() == v.size() && u.size() == basis.rows(),
          ErrorCode::kDimensionMismatch, "class_distance: dimension mismatch");
  const Matrix full = complete_basis(basis);
  const Vector cu = (full.transpose() * u).cwiseAbs();
  const Vector cv = (full.transpose() * v).cwiseAbs();
  return (cu - cv).norm();
}

double sign_distance(const Vector& u, const Vector& v) {
  return std::min((u - v).norm(), (u + v).norm());
}

Matrix random_rotation(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace hidden_basis
