#pragma once

#include <memory>
#include <vector>

#include "hidden_basis/bef.hpp"
#include "hidden_basis/recovery.hpp"

namespace hidden_basis {

/// Samples are stored one per row (N x d).
void validate_samples(const Matrix& samples);

struct Whitening {
  Matrix samples;  // centered, identity sample covariance
  Vector mean;
  Matrix transform;  // W: z = W (x - mean)
  Matrix inverse;    // W^{-1}, maps whitened directions back
};

/// Centers the samples and applies the symmetric inverse square root of the
/// sample covariance (1/N normalization).
Whitening whiten(const Matrix& samples);

/// Largest |entry| of (sample covariance - I).
double whiteness_defect(const Matrix& samples);

inline constexpr double kWhitenedTol = 0.05;

/// kCumulant differentiates mean <u,x>^4 - 3 |u|^4, kMoment differentiates
/// mean <u,x>^4 - 3. The two agree in value on the sphere; the moment
/// gradient carries an extra radial 12 u that turns the fixed points of
/// negative-kurtosis sources into repellers.
enum class IcaGradient { kCumulant, kMoment };

/// Fourth-cumulant contrast estimated from whitened samples:
/// F(u) = mean <u,x>^4 - 3 on the sphere, with gradient
/// 4 mean <u,x>^3 x - 12 |u|^2 u (kCumulant) or 4 mean <u,x>^3 x (kMoment).
GradientOracle ica_oracle(std::shared_ptr<const Matrix> samples,
                          IcaGradient form = IcaGradient::kCumulant);
GradientOracle ica_oracle(const Matrix& samples,
                          IcaGradient form = IcaGradient::kCumulant);

/// Symmetric tensor sum_k w_k mu_k^{(x) r} with orthonormal mu_k (columns).
struct OdecoTensor {
  Vector weights;
  Matrix directions;
  int order = 3;

  void validate() const;
  Eigen::Index dimension() const { return directions.rows(); }
};

/// grad F(u) = sum_k r w_k <u, mu_k>^{r-1} mu_k, i.e. r T(u, ..., u, .).
GradientOracle tensor_oracle(const OdecoTensor& tensor);

/// Row-major d^r entries of the tensor. Only for r in {3, 4}, d <= 8.
std::vector<double> dense_tensor(const OdecoTensor& tensor);

/// [T u^{r-1}]_j = sum T_{j i_2 .. i_r} u_{i_2} .. u_{i_r} by brute force.
/// Rejects entries that are not symmetric to 1e-10.
Vector dense_tensor_apply(const std::vector<double>& entries, int order,
                          const Vector& u);

struct SpectralOracle {
  GradientOracle oracle;
  double scale;  // the points were divided by this
};

/// F(u) = sum_i g(<u, x_i>) over points rescaled into the unit ball by their
/// largest norm.
SpectralOracle spectral_oracle(const Matrix& points, const ContrastFunction& g);

/// The contrast used by spectral_oracle when none is given: x^4.
ContrastFunction default_spectral_contrast();

/// u^T A u with gradient 2 A u. A must be symmetric to 1e-10.
GradientOracle matrix_oracle(const Matrix& a);

/// Moments of a mixture needed by the GMM reduction.
class MixtureMoments {
 public:
  virtual ~MixtureMoments() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual Vector mean() const = 0;
  virtual Matrix second_moment() const = 0;  // E x x^T
  virtual Matrix covariance() const;
  virtual double third_along(const Vector& y) const = 0;   // E <x,y>^3
  virtual Vector third_gradient(const Vector& y) const = 0;  // E <x,y>^2 x
};

std::shared_ptr<const MixtureMoments> sample_moments(
    std::shared_ptr<const Matrix> samples);

/// Closed-form moments of sum_i w_i N(mu_i, sigma^2 I); means as columns.
std::shared_ptr<const MixtureMoments> population_moments(Vector weights,
                                                         Matrix means,
                                                         double sigma);

/// How the norm of M^{-1}u enters the correction term.
enum class GmmNormForm { kSquared, kLinear };

/// F(u) = E<x,y>^3 - 3 sigma^2 |y|^2 E<x,y> with y = M^{-1} u (kSquared), or
/// with |y| in place of |y|^2 (kLinear).
GradientOracle gmm_oracle(std::shared_ptr<const MixtureMoments> moments,
                          const Matrix& inverse_root, double sigma2,
                          GmmNormForm form = GmmNormForm::kSquared);

struct GmmEstimate {
  double sigma = 0.0;
  Matrix means;    // columns
  Vector weights;
  Matrix adjusted_second_moment;  // E xx^T - sigma^2 I after clipping
  Matrix root;                    // its symmetric square root
  RecoveredBasis recovery;
  bool sign_ambiguous = false;
  bool weights_flagged = false;  // a weight below -0.05 or sum off [0.9, 1.1]
};

/// Full pipeline with k = d components.
GmmEstimate gmm_recover(std::shared_ptr<const MixtureMoments> moments,
                        const RecoveryConfig& config,
                        GmmNormForm form = GmmNormForm::kSquared);
GmmEstimate gmm_recover(const Matrix& samples, const RecoveryConfig& config);

}  // namespace hidden_basis
