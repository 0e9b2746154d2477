#pragma once

#include <functional>
#include <vector>

#include "hidden_basis/bef.hpp"

// Brute-force references used to check the main implementation.
namespace hidden_basis {

struct FiniteDiffSpec {
  double step = 1e-5;  // central differences; must lie in [1e-8, 1e-3]
};

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& u, const FiniteDiffSpec& spec = {});

struct FixedPointClass {
  std::vector<int> support;
  UnitVector point;
};

/// One positive-orthant fixed point per non-empty support, 2^m - 1 in total.
/// Supports are listed by increasing bitmask. Requires m <= 12.
std::vector<FixedPointClass> enumerate_fixed_points(const ExactBef& bef,
                                                    double tol = 1e-12);

struct GridScan {
  std::vector<UnitVector> maxima;    // local maxima of |F| on the grid
  std::vector<UnitVector> spurious;  // maxima farther than `tolerance` from every +-Z_i
  std::vector<bool> hit;             // per basis vector: some maximum near +Z_i or -Z_i
  double spacing = 0.0;              // angular grid step
  double tolerance = 0.0;
};

/// Local maxima of |F| on a grid of the circle (d = 2, `resolution` points,
/// two neighbours each) or of the sphere (d = 3, resolution x 2 resolution
/// latitude-longitude cells, eight neighbours each). F is summed directly from
/// the contrasts. Requires resolution >= 50.
GridScan grid_maxima_scan(const ExactBef& bef, int resolution);

}  // namespace hidden_basis
