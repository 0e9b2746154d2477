#include "hidden_basis/applications.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "hidden_basis/error.hpp"

namespace hidden_basis {

void validate_samples(const Matrix& samples) {
  require(samples.rows() >= 1 && samples.cols() >= 1,
          ErrorCode::kInvalidArgument, "samples: empty sample matrix");
  require(samples.allFinite(), ErrorCode::kInvalidArgument,
          "samples: non-finite entry");
}

namespace {

Matrix sample_covariance(const Matrix& samples, const Vector& mean) {
  const Matrix centered = samples.rowwise() - mean.transpose();
  return centered.transpose() * centered /
         static_cast<double>(samples.rows());
}

}  // namespace

Whitening whiten(const Matrix& samples) {
  validate_samples(samples);
  require(samples.rows() >= 2, ErrorCode::kInvalidArgument,
          "whiten: need at least two samples");
  Whitening out;
  out.mean = samples.colwise().mean().transpose();
  const Matrix cov = sample_covariance(samples, out.mean);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& lambda = eig.eigenvalues();
  require(lambda.minCoeff() > 1e-12 * std::max(1.0, lambda.maxCoeff()),
          ErrorCode::kDegenerate, "whiten: singular sample covariance");
  const Matrix& v = eig.eigenvectors();
  out.transform =
      v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  out.inverse = v * lambda.cwiseSqrt().asDiagonal() * v.transpose();
  out.samples =
      (samples.rowwise() - out.mean.transpose()) * out.transform.transpose();
  return out;
}

double whiteness_defect(const Matrix& samples) {
  validate_samples(samples);
  const Vector mean = samples.colwise().mean().transpose();
  const Matrix cov = sample_covariance(samples, mean);
  return (cov - Matrix::Identity(cov.rows(), cov.cols()))
      .cwiseAbs()
      .maxCoeff();
}

GradientOracle ica_oracle(std::shared_ptr<const Matrix> samples,
                          IcaGradient form) {
  require(samples != nullptr, ErrorCode::kInvalidArgument,
          "ica_oracle: null samples");
  validate_samples(*samples);
  require(whiteness_defect(*samples) <= kWhitenedTol,
          ErrorCode::kInvalidArgument,
          "ica_oracle: samples are not whitened");
  const double n = static_cast<double>(samples->rows());
  const bool cumulant = form == IcaGradient::kCumulant;
  auto grad = [samples, n, cumulant](const Vector& u) {
    const Vector p = *samples * u;
    Vector g = samples->transpose() * p.array().cube().matrix() * (4.0 / n);
    if (cumulant) g -= 12.0 * u.squaredNorm() * u;
    return g;
  };
  auto value = [samples, n, cumulant](const Vector& u) {
    const Vector p = *samples * u;
    const double r2 = u.squaredNorm();
    return p.array().square().square().sum() / n -
           3.0 * (cumulant ? r2 * r2 : 1.0);
  };
  return GradientOracle(samples->cols(), grad, value, 0.0);
}

GradientOracle ica_oracle(const Matrix& samples, IcaGradient form) {
  return ica_oracle(std::make_shared<const Matrix>(samples), form);
}

void OdecoTensor::validate() const {
  require(order >= 3, ErrorCode::kInvalidArgument,
          "OdecoTensor: order must be >= 3");
  require(directions.cols() >= 1 && directions.rows() >= 2,
          ErrorCode::kInvalidArgument, "OdecoTensor: empty decomposition");
  require(weights.size() == directions.cols(), ErrorCode::kDimensionMismatch,
          "OdecoTensor: one weight per direction");
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    require(weights[k] != 0.0 && std::isfinite(weights[k]),
            ErrorCode::kInvalidArgument, "OdecoTensor: weights must be nonzero");
  }
  const Matrix gram = directions.transpose() * directions;
  require((gram - Matrix::Identity(gram.rows(), gram.cols()))
                  .cwiseAbs()
                  .maxCoeff() <= kOrthonormalTol,
          ErrorCode::kInvalidArgument,
          "OdecoTensor: directions are not orthonormal");
}

GradientOracle tensor_oracle(const OdecoTensor& tensor) {
  tensor.validate();
  const Matrix mu = tensor.directions;
  const Vector w = tensor.weights;
  const double r = tensor.order;
  auto grad = [mu, w, r](const Vector& u) {
    const Vector c = mu.transpose() * u;
    Vector coeff(c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      coeff[k] = r * w[k] * std::pow(c[k], r - 1.0);
    }
    return Vector(mu * coeff);
  };
  auto value = [mu, w, r](const Vector& u) {
    const Vector c = mu.transpose() * u;
    double total = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      total += w[k] * std::pow(c[k], r);
    }
    return total;
  };
  return GradientOracle(tensor.dimension(), grad, value, 0.0);
}

namespace {

constexpr Eigen::Index kDenseMaxDim = 8;

std::size_t int_pow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Decodes a flat row-major index into its r coordinates.
std::vector<int> decode(std::size_t flat, int d, int r) {
  std::vector<int> idx(static_cast<std::size_t>(r));
  for (int k = r - 1; k >= 0; --k) {
    idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % d);
    flat /= static_cast<std::size_t>(d);
  }
  return idx;
}

std::size_t encode(const std::vector<int>& idx, int d) {
  std::size_t flat = 0;
  for (int i : idx) flat = flat * static_cast<std::size_t>(d) + i;
  return flat;
}

}  // namespace

std::vector<double> dense_tensor(const OdecoTensor& tensor) {
  tensor.validate();
  const int r = tensor.order;
  const Eigen::Index d = tensor.dimension();
  require(r == 3 || r == 4, ErrorCode::kInvalidArgument,
          "dense_tensor: order must be 3 or 4");
  require(d <= kDenseMaxDim, ErrorCode::kInvalidArgument,
          "dense_tensor: dimension above 8");
  const std::size_t total = int_pow(static_cast<std::size_t>(d), r);
  std::vector<double> entries(total, 0.0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const auto idx = decode(flat, static_cast<int>(d), r);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < tensor.weights.size(); ++k) {
      double term = tensor.weights[k];
      for (int i : idx) term *= tensor.directions(i, k);
      sum += term;
    }
    entries[flat] = sum;
  }
  return entries;
}

Vector dense_tensor_apply(const std::vector<double>& entries, int order,
                          const Vector& u) {
  require(order == 3 || order == 4, ErrorCode::kInvalidArgument,
          "dense_tensor_apply: order must be 3 or 4");
  const Eigen::Index d = u.size();
  require(d >= 1 && d <= kDenseMaxDim, ErrorCode::kInvalidArgument,
          "dense_tensor_apply: dimension must lie in [1, 8]");
  const std::size_t total = int_pow(static_cast<std::size_t>(d), order);
  require(entries.size() == total, ErrorCode::kDimensionMismatch,
          "dense_tensor_apply: entry count does not match d^r");
  for (std::size_t flat = 0; flat < total; ++flat) {
    auto idx = decode(flat, static_cast<int>(d), order);
    std::sort(idx.begin(), idx.end());
    require(std::abs(entries[flat] - entries[encode(idx, static_cast<int>(d))]) <=
                1e-10,
            ErrorCode::kInvalidArgument,
            "dense_tensor_apply: tensor is not symmetric");
  }
  Vector out = Vector::Zero(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const auto idx = decode(flat, static_cast<int>(d), order);
    double term = entries[flat];
    for (std::size_t k = 1; k < idx.size(); ++k) term *= u[idx[k]];
    out[idx[0]] += term;
  }
  return out;
}

SpectralOracle spectral_oracle(const Matrix& points, const ContrastFunction& g) {
  require(points.rows() >= 1, ErrorCode::kInvalidArgument,
          "spectral_oracle: empty point set");
  validate_samples(points);
  const double scale = points.rowwise().norm().maxCoeff();
  require(scale > 0, ErrorCode::kDegenerate,
          "spectral_oracle: all points are zero");
  auto scaled = std::make_shared<const Matrix>(points / scale);
  auto grad = [scaled, g](const Vector& u) {
    const Vector p = *scaled * u;
    Vector weights(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) weights[i] = g.first(p[i]);
    return Vector(scaled->transpose() * weights);
  };
  auto value = [scaled, g](const Vector& u) {
    const Vector p = *scaled * u;
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) total += g.value(p[i]);
    return total;
  };
  return SpectralOracle{GradientOracle(points.cols(), grad, value, 0.0), scale};
}

ContrastFunction default_spectral_contrast() {
  return ContrastFunction::monomial(1.0, 4.0);
}

GradientOracle matrix_oracle(const Matrix& a) {
  require(a.rows() == a.cols() && a.rows() >= 1, ErrorCode::kDimensionMismatch,
          "matrix_oracle: matrix must be square");
  require(a.allFinite(), ErrorCode::kInvalidArgument,
          "matrix_oracle: non-finite entry");
  require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          ErrorCode::kInvalidArgument, "matrix_oracle: matrix is not symmetric");
  auto grad = [a](const Vector& u) { return Vector(2.0 * (a * u)); };
  auto value = [a](const Vector& u) { return u.dot(a * u); };
  return GradientOracle(a.rows(), grad, value, 0.0);
}

Matrix MixtureMoments::covariance() const {
  const Vector m = mean();
  return second_moment() - m * m.transpose();
}

namespace {

class SampleMoments final : public MixtureMoments {
 public:
  explicit SampleMoments(std::shared_ptr<const Matrix> samples)
      : samples_(std::move(samples)) {
    const double n = static_cast<double>(samples_->rows());
    mean_ = samples_->colwise().mean().transpose();
    second_ = samples_->transpose() * *samples_ / n;
  }
  Eigen::Index dimension() const override { return samples_->cols(); }
  Vector mean() const override { return mean_; }
  Matrix second_moment() const override { return second_; }
  double third_along(const Vector& y) const override {
    const Vector p = *samples_ * y;
    return p.array().cube().sum() / static_cast<double>(samples_->rows());
  }
  Vector third_gradient(const Vector& y) const override {
    const Vector p = *samples_ * y;
    return samples_->transpose() * p.array().square().matrix() /
           static_cast<double>(samples_->rows());
  }

 private:
  std::shared_ptr<const Matrix> samples_;
  Vector mean_;
  Matrix second_;
};

class PopulationMoments final : public MixtureMoments {
 public:
  PopulationMoments(Vector weights, Matrix means, double sigma)
      : w_(std::move(weights)), mu_(std::move(means)), sigma_(sigma) {}
  Eigen::Index dimension() const override { return mu_.rows(); }
  Vector mean() const override { return mu_ * w_; }
  Matrix second_moment() const override {
    const Eigen::Index d = mu_.rows();
    return mu_ * w_.asDiagonal() * mu_.transpose() +
           sigma_ * sigma_ * Matrix::Identity(d, d);
  }
  double third_along(const Vector& y) const override {
    const double s2y = sigma_ * sigma_ * y.squaredNorm();
    double total = 0.0;
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
      const double a = mu_.col(i).dot(y);
      total += w_[i] * (a * a * a + 3.0 * s2y * a);
    }
    return total;
  }
  Vector third_gradient(const Vector& y) const override {
    const double s2 = sigma_ * sigma_;
    const double s2y = s2 * y.squaredNorm();
    Vector out = Vector::Zero(mu_.rows());
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
      const double a = mu_.col(i).dot(y);
      out += w_[i] * ((a * a + s2y) * mu_.col(i) + 2.0 * s2 * a * y);
    }
    return out;
  }

 private:
  Vector w_;
  Matrix mu_;
  double sigma_;
};

}  // namespace

std::shared_ptr<const MixtureMoments> sample_moments(
    std::shared_ptr<const Matrix> samples) {
  require(samples != nullptr, ErrorCode::kInvalidArgument,
          "sample_moments: null samples");
  validate_samples(*samples);
  return std::make_shared<SampleMoments>(std::move(samples));
}

std::shared_ptr<const MixtureMoments> population_moments(Vector weights,
                                                         Matrix means,
                                                         double sigma) {
  require(sigma > 0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "population_moments: sigma must be positive");
  require(weights.size() == means.cols() && weights.size() >= 1,
          ErrorCode::kDimensionMismatch,
          "population_moments: one weight per mean");
  require((weights.array() > 0).all(), ErrorCode::kInvalidArgument,
          "population_moments: weights must be positive");
  require(std::abs(weights.sum() - 1.0) <= 1e-9, ErrorCode::kInvalidArgument,
          "population_moments: weights must sum to 1");
  return std::make_shared<PopulationMoments>(std::move(weights),
                                             std::move(means), sigma);
}

GradientOracle gmm_oracle(std::shared_ptr<const MixtureMoments> moments,
                          const Matrix& inverse_root, double sigma2,
                          GmmNormForm form) {
  require(moments != nullptr, ErrorCode::kInvalidArgument,
          "gmm_oracle: null moments");
  const Eigen::Index d = moments->dimension();
  require(inverse_root.rows() == d && inverse_root.cols() == d,
          ErrorCode::kDimensionMismatch, "gmm_oracle: bad whitening matrix");
  const Vector m = moments->mean();
  const bool squared = form == GmmNormForm::kSquared;
  auto grad = [moments, inverse_root, sigma2, m, squared](const Vector& u) {
    const Vector y = inverse_root * u;
    const double my = m.dot(y);
    Vector gy = 3.0 * moments->third_gradient(y);
    if (squared) {
      gy -= 3.0 * sigma2 * (2.0 * my * y + y.squaredNorm() * m);
    } else {
      const double ny = y.norm();
      if (ny > 0) gy -= 3.0 * sigma2 * (my / ny * y + ny * m);
    }
    return Vector(inverse_root.transpose() * gy);
  };
  auto value = [moments, inverse_root, sigma2, m, squared](const Vector& u) {
    const Vector y = inverse_root * u;
    const double scale = squared ? y.squaredNorm() : y.norm();
    return moments->third_along(y) - 3.0 * sigma2 * scale * m.dot(y);
  };
  return GradientOracle(d, grad, value, 0.0);
}

namespace {

constexpr double kClipRatio = 1e-6;
// M2 counts as rank deficient when an eigenvalue falls below this fraction of
// the noise variance.
constexpr double kDegenerateRatio = 1e-3;
constexpr double kNegativeWeight = -0.05;

}  // namespace

GmmEstimate gmm_recover(std::shared_ptr<const MixtureMoments> moments,
                        const RecoveryConfig& config, GmmNormForm form) {
  require(moments != nullptr, ErrorCode::kInvalidArgument,
          "gmm_recover: null moments");
  const Eigen::Index d = moments->dimension();
  require(d >= 2, ErrorCode::kInvalidArgument, "gmm_recover: need d >= 2");

  GmmEstimate est;
  Eigen::SelfAdjointEigenSolver<Matrix> cov_eig(moments->covariance());
  const double sigma2 = std::max(cov_eig.eigenvalues()[0], 0.0);
  const Vector v = cov_eig.eigenvectors().col(0);
  est.sigma = std::sqrt(sigma2);

  const Matrix m2 = moments->second_moment() - sigma2 * Matrix::Identity(d, d);
  Eigen::SelfAdjointEigenSolver<Matrix> m2_eig(m2);
  Vector lambda = m2_eig.eigenvalues();
  const double norm = lambda.cwiseAbs().maxCoeff();
  require(norm > 0, ErrorCode::kDegenerate,
          "gmm_recover: second moment carries no signal");
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < 0) {
      require(lambda[i] >= -kClipRatio * norm, ErrorCode::kNumerical,
              "gmm_recover: adjusted second moment is not PSD");
      lambda[i] = 0.0;
    }
  }
  const double floor =
      std::max(kDegenerateRatio * sigma2, 1e-12 * norm);
  require(lambda.minCoeff() > floor, ErrorCode::kDegenerate,
          "gmm_recover: adjusted second moment is rank deficient");
  const Matrix& q = m2_eig.eigenvectors();
  est.adjusted_second_moment = q * lambda.asDiagonal() * q.transpose();
  est.root = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
  const Matrix inverse_root =
      q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();

  RecoveryConfig rc = config;
  rc.m_hat = static_cast<int>(d);
  const GradientOracle oracle = gmm_oracle(moments, inverse_root, sigma2, form);
  est.recovery = robust_gi_recovery(oracle, rc);

  const Vector mean = moments->mean();
  const double anchor = mean.dot(v);
  est.means.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Vector a =
        est.root * est.recovery.directions[static_cast<std::size_t>(i)].vec();
    const double proj = a.dot(v);
    if (std::abs(proj) <= 1e-8 * a.norm() ||
        std::abs(anchor) <= 1e-8 * mean.norm()) {
      est.sign_ambiguous = true;
      est.means.col(i) = a;
    } else {
      est.means.col(i) = (anchor / proj) * a;
    }
  }
  est.weights = est.means.colPivHouseholderQr().solve(mean);
  const double total = est.weights.sum();
  est.weights_flagged = (est.weights.array() < kNegativeWeight).any() ||
                        total < 0.9 || total > 1.1;
  return est;
}

GmmEstimate gmm_recover(const Matrix& samples, const RecoveryConfig& config) {
  return gmm_recover(sample_moments(std::make_shared<const Matrix>(samples)),
                     config);
}

}  // namespace hidden_basis
