#include "hidden_basis/bef.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "hidden_basis/error.hpp"
#include "hidden_basis/seeding.hpp"

namespace hidden_basis {
namespace {

constexpr double kBallTol = 1e-9;

void check_ball(const Vector& u, Eigen::Index d, const char* who) {
  if (u.size() != d) {
    std::ostringstream msg;
    msg << who << ": expected dimension " << d << ", got " << u.size();
    fail(ErrorCode::kDimensionMismatch, msg.str());
  }
  require(u.norm() <= 1.0 + kBallTol, ErrorCode::kInvalidArgument,
          std::string(who) + ": query outside the closed unit ball");
}

}  // namespace

ExactBef::ExactBef(Matrix basis, std::vector<ContrastFunction> contrasts)
    : basis_(std::move(basis)), contrasts_(std::move(contrasts)) {
  const Eigen::Index d = basis_.rows();
  const Eigen::Index m = basis_.cols();
  require(d >= 2, ErrorCode::kInvalidArgument, "ExactBef: need d >= 2");
  require(m >= 1 && m <= d, ErrorCode::kInvalidArgument,
          "ExactBef: need 1 <= m <= d");
  require(static_cast<Eigen::Index>(contrasts_.size()) == m,
          ErrorCode::kDimensionMismatch,
          "ExactBef: one contrast per basis vector");
  const Matrix gram = basis_.transpose() * basis_;
  const double defect =
      (gram - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
  require(defect <= kOrthonormalTol, ErrorCode::kInvalidArgument,
          "ExactBef: basis is not orthonormal");
  h_.reserve(contrasts_.size());
  for (const auto& g : contrasts_) h_.emplace_back(g);
}

std::optional<RobustnessCertificate> ExactBef::certificate() const {
  std::vector<RobustnessCertificate> certs;
  for (const auto& g : contrasts_) {
    if (!g.certificate()) return std::nullopt;
    certs.push_back(*g.certificate());
  }
  return combine_certificates(certs);
}

double eval_f(const ExactBef& bef, const Vector& u) {
  check_ball(u, bef.dimension(), "eval_f");
  const Vector coords = bef.basis().transpose() * u;
  double total = 0.0;
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    total += bef.contrasts()[static_cast<std::size_t>(i)].value(coords[i]);
  }
  return total;
}

Vector eval_grad(const ExactBef& bef, const Vector& u) {
  check_ball(u, bef.dimension(), "eval_grad");
  const Vector coords = bef.basis().transpose() * u;
  Vector weights(coords.size());
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    weights[i] = bef.contrasts()[static_cast<std::size_t>(i)].first(coords[i]);
  }
  return bef.basis() * weights;
}

Vector eval_grad_h_form(const ExactBef& bef, const Vector& u) {
  check_ball(u, bef.dimension(), "eval_grad_h_form");
  const Vector coords = bef.basis().transpose() * u;
  Vector weights(coords.size());
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    const double ui = coords[i];
    const double slope = bef.h()[static_cast<std::size_t>(i)].first(ui * ui);
    // g(u) = h(u^2) for even g and sign(u) h(u^2) for odd g.
    const bool even =
        bef.contrasts()[static_cast<std::size_t>(i)].symmetry() ==
        Symmetry::kEven;
    weights[i] = 2.0 * slope * (even ? ui : std::abs(ui));
  }
  return bef.basis() * weights;
}

GradientOracle::GradientOracle(Eigen::Index dimension, GradFn grad,
                               std::optional<ValueFn> value, double epsilon)
    : dimension_(dimension),
      grad_(std::move(grad)),
      value_(std::move(value)),
      epsilon_(epsilon) {
  require(dimension_ >= 1, ErrorCode::kInvalidArgument,
          "GradientOracle: dimension must be positive");
  require(static_cast<bool>(grad_), ErrorCode::kInvalidArgument,
          "GradientOracle: missing gradient");
  require(epsilon_ >= 0 && std::isfinite(epsilon_),
          ErrorCode::kInvalidArgument,
          "GradientOracle: epsilon must be finite and non-negative");
}

void GradientOracle::check(const Vector& u) const {
  check_ball(u, dimension_, "GradientOracle");
}

Vector GradientOracle::grad(const Vector& u) const {
  check(u);
  Vector g = grad_(u);
  require(g.size() == dimension_, ErrorCode::kDimensionMismatch,
          "GradientOracle: gradient has wrong dimension");
  return g;
}

double GradientOracle::value(const Vector& u) const {
  require(value_.has_value(), ErrorCode::kInvalidArgument,
          "GradientOracle: no value function attached");
  check(u);
  return (*value_)(u);
}

GradientOracle make_exact_oracle(std::shared_ptr<const ExactBef> bef) {
  require(bef != nullptr, ErrorCode::kInvalidArgument,
          "make_exact_oracle: null BEF");
  const Eigen::Index d = bef->dimension();
  return GradientOracle(
      d, [bef](const Vector& u) { return eval_grad(*bef, u); },
      [bef](const Vector& u) { return eval_f(*bef, u); }, 0.0);
}

GradientOracle make_exact_oracle(const ExactBef& bef) {
  return make_exact_oracle(std::make_shared<const ExactBef>(bef));
}

namespace {

std::uint64_t hash_vector(const Vector& u, std::uint64_t seed) {
  std::uint64_t h = mix64(seed);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double x = u[i];
    if (x == 0.0) x = 0.0;  // +0 and -0 hash alike
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    h = mix64(h ^ bits);
  }
  return h;
}

}  // namespace

GradientOracle perturb_oracle(const GradientOracle& base, double epsilon,
                              PerturbationMode mode, std::uint64_t seed) {
  require(epsilon >= 0 && std::isfinite(epsilon), ErrorCode::kInvalidArgument,
          "perturb_oracle: epsilon must be non-negative");
  const Eigen::Index d = base.dimension();
  GradientOracle::GradFn field;

  if (mode == PerturbationMode::kDeterministic) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    Matrix mixing(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i) mixing(i, j) = 3.0 * normal(rng);
    Vector offset(d);
    for (Eigen::Index i = 0; i < d; ++i) offset[i] = phase(rng);
    const double scale = epsilon / std::sqrt(static_cast<double>(d));
    field = [base, mixing, offset, scale](const Vector& u) {
      const Vector arg = mixing * u + offset;
      return Vector(base.grad(u) + scale * arg.array().sin().matrix());
    };
  } else {
    field = [base, epsilon, seed, d](const Vector& u) {
      Rng rng(hash_vector(u, seed));
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector z(d);
      double norm = 0.0;
      do {
        for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
        norm = z.norm();
      } while (norm < 1e-12);
      return Vector(base.grad(u) + z * (epsilon / norm));
    };
  }

  std::optional<GradientOracle::ValueFn> value;
  if (base.has_value()) {
    value = [base](const Vector& u) { return base.value(u); };
  }
  return GradientOracle(d, std::move(field), std::move(value),
                        base.epsilon() + epsilon);
}

}  // namespace hidden_basis
