#include "hidden_basis/reference.hpp"

#include <cmath>

#include "hidden_basis/error.hpp"
#include "hidden_basis/iteration.hpp"

namespace hidden_basis {

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& u, const FiniteDiffSpec& spec) {
  require(spec.step >= 1e-8 && spec.step <= 1e-3, ErrorCode::kInvalidArgument,
          "finite_diff_grad: step must lie in [1e-8, 1e-3]");
  Vector out(u.size());
  Vector probe = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + spec.step;
    const double up = f(probe);
    probe[i] = u[i] - spec.step;
    const double down = f(probe);
    probe[i] = u[i];
    out[i] = (up - down) / (2.0 * spec.step);
  }
  return out;
}

std::vector<FixedPointClass> enumerate_fixed_points(const ExactBef& bef,
                                                    double tol) {
  const Eigen::Index m = bef.size();
  require(m <= 12, ErrorCode::kInvalidArgument,
          "enumerate_fixed_points: m must be <= 12");
  std::vector<FixedPointClass> out;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> support;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) support.push_back(i);
    }
    UnitVector point = fixed_point_for_support(bef, support, tol);
    out.push_back(FixedPointClass{std::move(support), std::move(point)});
  }
  return out;
}

namespace {

double abs_f(const ExactBef& bef, const Vector& u) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < bef.size(); ++i) {
    total += bef.contrasts()[static_cast<std::size_t>(i)].value(
        bef.basis().col(i).dot(u));
  }
  return std::abs(total);
}

// Ties between equal values go to the smaller index.
bool beats(double value, std::size_t index, double other, std::size_t other_index) {
  return value > other || (value == other && index < other_index);
}

}  // namespace

GridScan grid_maxima_scan(const ExactBef& bef, int resolution) {
  const Eigen::Index d = bef.dimension();
  require(d == 2 || d == 3, ErrorCode::kInvalidArgument,
          "grid_maxima_scan: dimension must be 2 or 3");
  require(resolution >= 50, ErrorCode::kInvalidArgument,
          "grid_maxima_scan: resolution must be >= 50");

  std::vector<Vector> points;
  std::vector<std::vector<std::size_t>> neighbours;
  GridScan scan;

  if (d == 2) {
    const std::size_t n = static_cast<std::size_t>(resolution);
    scan.spacing = 2.0 * M_PI / resolution;
    scan.tolerance = scan.spacing;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = scan.spacing * static_cast<double>(k);
      Vector p(2);
      p << std::cos(t), std::sin(t);
      points.push_back(p);
      neighbours.push_back({(k + n - 1) % n, (k + 1) % n});
    }
  } else {
    const int rows = resolution;
    const int cols = 2 * resolution;
    scan.spacing = M_PI / resolution;
    scan.tolerance = std::sqrt(2.0) * scan.spacing;
    auto at = [cols](int i, int j) {
      return static_cast<std::size_t>(i * cols + ((j % cols) + cols) % cols);
    };
    for (int i = 0; i < rows; ++i) {
      const double theta = (i + 0.5) * scan.spacing;
      for (int j = 0; j < cols; ++j) {
        const double phi = (j + 0.5) * scan.spacing;
        Vector p(3);
        p << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta);
        points.push_back(p);
        std::vector<std::size_t> nb;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            int ni = i + di;
            int nj = j + dj;
            // Stepping over a pole lands on the same ring, half a turn away.
            if (ni < 0 || ni >= rows) {
              ni = i;
              nj = j + resolution + dj;
            }
            const std::size_t idx = at(ni, nj);
            if (idx != at(i, j)) nb.push_back(idx);
          }
        }
        neighbours.push_back(std::move(nb));
      }
    }
  }

  std::vector<double> values(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) values[k] = abs_f(bef, points[k]);

  scan.hit.assign(static_cast<std::size_t>(bef.size()), false);
  for (std::size_t k = 0; k < points.size(); ++k) {
    bool is_max = values[k] > 0.0;
    for (std::size_t j : neighbours[k]) {
      if (!is_max || !beats(values[k], k, values[j], j)) {
        is_max = false;
        break;
      }
    }
    if (!is_max) continue;
    scan.maxima.push_back(UnitVector::normalize(points[k]));
    bool near = false;
    for (Eigen::Index i = 0; i < bef.size(); ++i) {
      if (sign_distance(points[k], bef.basis().col(i)) <= scan.tolerance) {
        near = true;
        scan.hit[static_cast<std::size_t>(i)] = true;
      }
    }
    if (!near) scan.spurious.push_back(UnitVector::normalize(points[k]));
  }
  return scan;
}

}  // namespace hidden_basis
