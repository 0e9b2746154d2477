#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hidden_basis {

enum class Symmetry { kEven, kOdd };

/// Quantified hidden convexity of a contrast:
///   beta * x^(delta-1) <= |h''(x)| <= alpha * x^(gamma-1)  on (0, 1].
struct RobustnessCertificate {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;

  /// All constants positive, alpha >= beta and gamma <= delta.
  bool is_consistent() const;
};

/// Certificate valid for every contrast of a family: (max alpha, min beta,
/// min gamma, max delta). Requires a non-empty list.
RobustnessCertificate combine_certificates(
    const std::vector<RobustnessCertificate>& certificates);

/// Optional closed forms attached to a contrast.
struct ContrastExtras {
  std::optional<std::function<double(double)>> h_second;  // h'' away from 0
  std::optional<RobustnessCertificate> certificate;
  bool quadratic_border = false;  // h'' == 0, the matrix case
};

/// A scalar contrast g on [-1, 1] with its first two derivatives.
///
/// g(0) = 0 is enforced at construction by shifting g. The declared symmetry
/// is verified on a sample grid and construction fails when it does not hold.
/// Contrasts may carry a closed-form second derivative of their h-transform
/// and a robustness certificate; both propagate through `scaled`.
class ContrastFunction {
 public:
  using ScalarFn = std::function<double(double)>;
  using Extras = ContrastExtras;

  ContrastFunction(std::string name, ScalarFn g, ScalarFn g_prime,
                   ScalarFn g_second, Symmetry symmetry, Extras extras = {});

  /// g(x) = weight * x^power for integer powers, weight * |x|^power otherwise.
  /// A certificate is attached when power > 2.
  static ContrastFunction monomial(double weight, double power);

  /// t -> outer * g(inner * t).
  ContrastFunction scaled(double outer, double inner) const;

  double value(double x) const { return g_(x); }
  double first(double x) const { return g_prime_(x); }
  double second(double x) const { return g_second_(x); }

  const std::string& name() const { return name_; }
  Symmetry symmetry() const { return symmetry_; }
  const std::optional<RobustnessCertificate>& certificate() const {
    return extras_.certificate;
  }
  bool is_quadratic_border() const { return extras_.quadratic_border; }
  const std::optional<ScalarFn>& closed_form_h_second() const {
    return extras_.h_second;
  }

  /// Forward difference of g(sqrt(x)) at x = 1e-10: the right derivative of
  /// the h-transform at zero, which must vanish for admissible contrasts.
  double h_right_slope_at_zero() const;

 private:
  std::string name_;
  ScalarFn g_;
  ScalarFn g_prime_;
  ScalarFn g_second_;
  Symmetry symmetry_;
  Extras extras_;
};

/// h(x) = g(sign(x) * sqrt|x|) and its derivatives.
class HTransform {
 public:
  explicit HTransform(ContrastFunction source) : source_(std::move(source)) {}

  double value(double x) const;
  /// Zero at x = 0.
  double first(double x) const;
  /// Refuses x = 0. Without a closed form only |x| >= 1e-6 is evaluated.
  double second(double x) const;

  const ContrastFunction& source() const { return source_; }

  /// |h'| strictly increasing on a log-spaced grid of (0, 1].
  bool first_derivative_monotone(int grid_size = 1000) const;

 private:
  ContrastFunction source_;
};

struct CertificationResult {
  bool valid = false;
  std::optional<double> offending_x;
  std::string reason;

  explicit operator bool() const { return valid; }
};

/// Samples the certificate bounds at `grid_size` log-spaced points of
/// [1e-6, 1]. grid_size must be at least 100.
CertificationResult certify_robustness(const ContrastFunction& g,
                                       const RobustnessCertificate& cert,
                                       int grid_size = 1000);

/// Log-spaced grid of n points in [lo, 1].
std::vector<double> log_grid(int n, double lo = 1e-6);

}  // namespace hidden_basis
