#pragma once

#include <memory>
#include <vector>

#include "hidden_basis/bef.hpp"
#include "hidden_basis/sphere.hpp"

namespace hidden_basis::testing {

inline std::vector<ContrastFunction> monomials(const std::vector<double>& weights,
                                               double power) {
  std::vector<ContrastFunction> out;
  for (double w : weights) out.push_back(ContrastFunction::monomial(w, power));
  return out;
}

inline ExactBef quartic(Eigen::Index d, Eigen::Index m = -1) {
  if (m < 0) m = d;
  return ExactBef(Matrix::Identity(d, m),
                  monomials(std::vector<double>(static_cast<std::size_t>(m), 1.0), 4));
}

inline ExactBef rotated(Eigen::Index d, std::vector<ContrastFunction> gs,
                        std::uint64_t seed) {
  Rng rng(seed);
  const auto m = static_cast<Eigen::Index>(gs.size());
  return ExactBef(random_rotation(d, rng).leftCols(m), std::move(gs));
}

inline GradientOracle exact(const ExactBef& bef) {
  return make_exact_oracle(std::make_shared<const ExactBef>(bef));
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace hidden_basis::testing
