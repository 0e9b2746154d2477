#include "hidden_basis/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hidden_basis/error.hpp"

namespace hidden_basis {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kHSecondIdentityFloor = 1e-6;

bool is_integer(double x) { return std::floor(x) == x; }

double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

bool RobustnessCertificate::is_consistent() const {
  return alpha > 0 && beta > 0 && gamma > 0 && delta > 0 && alpha >= beta &&
         gamma <= delta;
}

RobustnessCertificate combine_certificates(
    const std::vector<RobustnessCertificate>& certificates) {
  require(!certificates.empty(), ErrorCode::kInvalidArgument,
          "combine_certificates: empty list");
  RobustnessCertificate out = certificates.front();
  for (const auto& c : certificates) {
    out.alpha = std::max(out.alpha, c.alpha);
    out.beta = std::min(out.beta, c.beta);
    out.gamma = std::min(out.gamma, c.gamma);
    out.delta = std::max(out.delta, c.delta);
  }
  return out;
}

ContrastFunction::ContrastFunction(std::string name, ScalarFn g,
                                   ScalarFn g_prime, ScalarFn g_second,
                                   Symmetry symmetry, Extras extras)
    : name_(std::move(name)),
      g_prime_(std::move(g_prime)),
      g_second_(std::move(g_second)),
      symmetry_(symmetry),
      extras_(std::move(extras)) {
  require(g && g_prime_ && g_second_, ErrorCode::kInvalidArgument,
          "contrast '" + name_ + "': missing function");
  const double offset = g(0.0);
  if (offset != 0.0) {
    g_ = [g = std::move(g), offset](double x) { return g(x) - offset; };
  } else {
    g_ = std::move(g);
  }

  const double s = symmetry_ == Symmetry::kEven ? 1.0 : -1.0;
  for (int k = 0; k <= 200; ++k) {
    const double x = -1.0 + 0.01 * k;
    const double gx = g_(x);
    if (std::abs(gx - s * g_(-x)) > kSymmetryTol * (1.0 + std::abs(gx))) {
      std::ostringstream msg;
      msg << "contrast '" << name_ << "' violates declared "
          << (symmetry_ == Symmetry::kEven ? "even" : "odd")
          << " symmetry at x=" << x;
      fail(ErrorCode::kInvalidArgument, msg.str());
    }
  }
  if (extras_.certificate) {
    require(extras_.certificate->is_consistent(), ErrorCode::kInvalidArgument,
            "contrast '" + name_ + "': inconsistent certificate");
  }
}

ContrastFunction ContrastFunction::monomial(double weight, double power) {
  require(weight != 0.0, ErrorCode::kInvalidArgument,
          "monomial contrast: weight must be non-zero");
  require(power >= 2.0 && std::isfinite(power), ErrorCode::kInvalidArgument,
          "monomial contrast: power must be >= 2");

  const bool integral = is_integer(power);
  const bool odd = integral && static_cast<long long>(power) % 2 != 0;
  const double w = weight;
  const double r = power;

  ScalarFn g, g1, g2;
  if (integral) {
    g = [w, r](double x) { return w * std::pow(x, r); };
    g1 = [w, r](double x) { return w * r * std::pow(x, r - 1); };
    g2 = [w, r](double x) { return w * r * (r - 1) * std::pow(x, r - 2); };
  } else {
    g = [w, r](double x) { return w * std::pow(std::abs(x), r); };
    g1 = [w, r](double x) {
      return w * r * sign_of(x) * std::pow(std::abs(x), r - 1);
    };
    g2 = [w, r](double x) {
      return w * r * (r - 1) * std::pow(std::abs(x), r - 2);
    };
  }

  // h(t) = w * |t|^a (times sign(t) when odd), a = r / 2.
  const double a = r / 2.0;
  Extras extras;
  extras.h_second = [w, a, odd](double x) {
    const double mag = w * a * (a - 1.0) * std::pow(std::abs(x), a - 2.0);
    return odd ? sign_of(x) * mag : mag;
  };
  if (r > 2.0) {
    const double c = std::abs(w) * a * (a - 1.0);
    extras.certificate = RobustnessCertificate{c, c, a - 1.0, a - 1.0};
  } else {
    extras.quadratic_border = true;
  }

  std::ostringstream name;
  name << "monomial(w=" << weight << ",r=" << power << ")";
  return ContrastFunction(name.str(), std::move(g), std::move(g1),
                          std::move(g2),
                          odd ? Symmetry::kOdd : Symmetry::kEven,
                          std::move(extras));
}

ContrastFunction ContrastFunction::scaled(double outer, double inner) const {
  require(outer != 0.0 && inner != 0.0, ErrorCode::kInvalidArgument,
          "scaled contrast: factors must be non-zero");
  const ContrastFunction base = *this;
  ScalarFn g = [base, outer, inner](double t) {
    return outer * base.value(inner * t);
  };
  ScalarFn g1 = [base, outer, inner](double t) {
    return outer * inner * base.first(inner * t);
  };
  ScalarFn g2 = [base, outer, inner](double t) {
    return outer * inner * inner * base.second(inner * t);
  };

  Extras extras;
  extras.quadratic_border = extras_.quadratic_border;
  if (extras_.h_second) {
    // h_s(x) = outer * s * h(inner^2 x), s = -1 only for odd g with inner < 0.
    const double s =
        (symmetry_ == Symmetry::kOdd && inner < 0) ? -1.0 : 1.0;
    const double factor = outer * s * std::pow(inner, 4);
    const double stretch = inner * inner;
    extras.h_second = [hs = *extras_.h_second, factor, stretch](double x) {
      return factor * hs(stretch * x);
    };
  }
  if (extras_.certificate) {
    // Exact power-law bounds rescale exactly; anything looser is dropped.
    const auto& c = *extras_.certificate;
    if (c.gamma == c.delta && c.alpha == c.beta) {
      const double scale =
          std::abs(outer) * std::pow(inner, 4) *
          std::pow(inner * inner, c.gamma - 1.0);
      extras.certificate = RobustnessCertificate{
          c.alpha * scale, c.beta * scale, c.gamma, c.delta};
    }
  }
  std::ostringstream name;
  name << outer << "*" << name_ << "(" << inner << "t)";
  return ContrastFunction(name.str(), std::move(g), std::move(g1),
                          std::move(g2), symmetry_, std::move(extras));
}

double ContrastFunction::h_right_slope_at_zero() const {
  constexpr double x = 1e-10;
  return (g_(std::sqrt(x)) - g_(0.0)) / x;
}

double HTransform::value(double x) const {
  return source_.value(sign_of(x) * std::sqrt(std::abs(x)));
}

double HTransform::first(double x) const {
  if (x == 0.0) return 0.0;
  const double root = std::sqrt(std::abs(x));
  return 0.5 * source_.first(sign_of(x) * root) / root;
}

double HTransform::second(double x) const {
  require(x != 0.0, ErrorCode::kInvalidArgument,
          "h'' is not evaluated at 0");
  if (const auto& closed = source_.closed_form_h_second()) {
    return (*closed)(x);
  }
  const double ax = std::abs(x);
  require(ax >= kHSecondIdentityFloor, ErrorCode::kNumerical,
          "h'' without closed form is only evaluated for |x| >= 1e-6");
  const double root = std::sqrt(ax);
  const double s = sign_of(x) * root;
  return 0.25 * (source_.second(s) / ax -
                 sign_of(x) * source_.first(s) / (ax * root));
}

bool HTransform::first_derivative_monotone(int grid_size) const {
  const auto grid = log_grid(grid_size);
  double previous = std::abs(first(grid.front()));
  if (previous <= 0.0) return false;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double current = std::abs(first(grid[k]));
    if (!(current > previous)) return false;
    previous = current;
  }
  return true;
}

std::vector<double> log_grid(int n, double lo) {
  require(n >= 2 && lo > 0 && lo < 1, ErrorCode::kInvalidArgument,
          "log_grid: bad arguments");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double llo = std::log(lo);
  for (int k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] =
        std::exp(llo - llo * static_cast<double>(k) / (n - 1));
  }
  out.back() = 1.0;
  return out;
}

CertificationResult certify_robustness(const ContrastFunction& g,
                                       const RobustnessCertificate& cert,
                                       int grid_size) {
  require(grid_size >= 100, ErrorCode::kInvalidArgument,
          "certify_robustness: grid_size must be >= 100");
  CertificationResult result;
  if (!cert.is_consistent()) {
    result.reason = "certificate constants inconsistent";
    return result;
  }
  constexpr double kSlack = 1e-12;
  const HTransform h(g);
  for (double x : log_grid(grid_size)) {
    const double curvature = std::abs(h.second(x));
    const double lower = cert.beta * std::pow(x, cert.delta - 1.0);
    const double upper = cert.alpha * std::pow(x, cert.gamma - 1.0);
    if (curvature < lower * (1.0 - kSlack)) {
      result.offending_x = x;
      result.reason = "lower bound violated";
      return result;
    }
    if (curvature > upper * (1.0 + kSlack)) {
      result.offending_x = x;
      result.reason = "upper bound violated";
      return result;
    }
  }
  result.valid = true;
  return result;
}

}  // namespace hidden_basis
