#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "hidden_basis/applications.hpp"
#include "hidden_basis/error.hpp"
#include "hidden_basis/iteration.hpp"

namespace hb = hidden_basis;
using hb::testing::vec;

namespace {

const hb::UnitVector kPlanar(vec({0.8, 0.6}));

}  // namespace

TEST(GiStep, PlanarQuartic) {
  const auto o = hb::testing::exact(hb::testing::quartic(2));
  const auto next = hb::gi_step(o, kPlanar);
  EXPECT_NEAR(next[0], 0.921364160958329, 1e-14);
  EXPECT_NEAR(next[1], 0.38870050540429505, 1e-14);
}

TEST(GiStep, BasisVectorIsFixed) {
  const auto bef = hb::testing::rotated(4, hb::testing::monomials({1, 2, 3, 4}, 4), 2);
  const auto o = hb::testing::exact(bef);
  const hb::UnitVector z(bef.basis().col(2));
  EXPECT_LT(hb::sign_distance(hb::gi_step(o, z).vec(), z.vec()), 1e-14);
}

TEST(GiStep, MatrixPowerStep) {
  const auto o = hb::matrix_oracle(vec({3, 1}).asDiagonal().toDenseMatrix());
  const auto next = hb::gi_step(o, hb::UnitVector(vec({M_SQRT1_2, M_SQRT1_2})));
  EXPECT_NEAR(next[0], 0.9486832980505138, 1e-15);
  EXPECT_NEAR(next[1], 0.31622776601683793, 1e-15);
}

TEST(GiStep, ZeroGradientKeepsState) {
  const auto o = hb::testing::exact(hb::testing::quartic(3, 1));
  const hb::UnitVector u(vec({0, 0.6, 0.8}));
  EXPECT_EQ((hb::gi_step(o, u).vec() - u.vec()).norm(), 0.0);
}

TEST(GiLoop, ZeroStepsReturnsStart) {
  const auto o = hb::testing::exact(hb::testing::quartic(2));
  const auto r = hb::gi_loop(o, kPlanar, 0);
  EXPECT_EQ((r.state.vec() - kPlanar.vec()).norm(), 0.0);
  EXPECT_EQ(r.trace.steps(), 0u);
  EXPECT_TRUE(std::isinf(r.last_residual));
}

TEST(GiLoop, QuarticRatiosCube) {
  const auto o = hb::testing::exact(hb::testing::quartic(2));
  const auto r = hb::gi_loop(o, kPlanar, 3);
  ASSERT_EQ(r.trace.states.size(), 4u);
  const double expected[] = {0.75, 0.421875, 0.075084686279296875,
                             0.00042330569521781269};
  for (int n = 0; n <= 3; ++n) {
    const auto& s = r.trace.states[static_cast<std::size_t>(n)];
    EXPECT_NEAR(s[1] / s[0], expected[n], 1e-15 * (1 + expected[n])) << n;
  }
}

TEST(GiLoop, FixedStartGivesConstantTrace) {
  const auto o = hb::testing::exact(hb::testing::quartic(3));
  const auto z = hb::UnitVector::basis(3, 1);
  const auto r = hb::gi_loop(o, z, 5);
  for (const auto& s : r.trace.states) EXPECT_EQ((s - z.vec()).norm(), 0.0);
}

TEST(GiLoop, StopTolEndsEarly) {
  const auto o = hb::testing::exact(hb::testing::quartic(4));
  const hb::UnitVector u(vec({0.7, 0.5, 0.4, std::sqrt(1 - 0.49 - 0.25 - 0.16)}));
  const auto r = hb::gi_loop(o, u, 100, true, 1e-12);
  EXPECT_LT(r.steps_taken, 100);
  EXPECT_LE(r.last_residual, 1e-12);
}

TEST(Trace, CsvLayout) {
  const auto o = hb::testing::exact(hb::testing::quartic(2));
  const auto r = hb::gi_loop(o, kPlanar, 2);
  std::ostringstream out;
  hb::write_trace_csv(out, r.trace);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,u_0,u_1,grad_norm");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(RunToConvergence, BasisStart) {
  const auto o = hb::testing::exact(hb::testing::quartic(3));
  const auto rep = hb::run_to_convergence(o, hb::UnitVector::basis(3, 0), 1e-10, 100);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.steps, 1);
}

TEST(RunToConvergence, QuarticEightDimensions) {
  const auto o = hb::testing::exact(hb::testing::quartic(8));
  hb::Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    const auto rep = hb::run_to_convergence(o, hb::sample_sphere(8, rng), 1e-10, 1000);
    ASSERT_TRUE(rep.converged);
    EXPECT_NEAR(rep.limit.vec().cwiseAbs().maxCoeff(), 1.0, 1e-10);
    EXPECT_LE(rep.steps, 30);
  }
}

TEST(RunToConvergence, SymmetricUnstablePointIsReported) {
  const auto o = hb::testing::exact(hb::testing::quartic(2));
  const hb::UnitVector v(vec({M_SQRT1_2, M_SQRT1_2}));
  const auto rep = hb::run_to_convergence(o, v, 1e-10, 100);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT((rep.limit.vec() - v.vec()).norm(), 1e-12);
}

TEST(RunToConvergence, BudgetExhaustionIsNotAnError) {
  const auto o = hb::matrix_oracle(vec({1, 0.999}).asDiagonal().toDenseMatrix());
  const auto rep = hb::run_to_convergence(o, kPlanar, 1e-14, 5);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.steps, 5);
}

TEST(FixedPoint, SymmetricPair) {
  const auto v = hb::fixed_point_for_support(hb::testing::quartic(2), {0, 1});
  EXPECT_NEAR(v[0], M_SQRT1_2, 1e-12);
  EXPECT_NEAR(v[1], M_SQRT1_2, 1e-12);
}

TEST(FixedPoint, WeightedPair) {
  const hb::ExactBef bef(hb::Matrix::Identity(2, 2), hb::testing::monomials({1, 2}, 4));
  const auto v = hb::fixed_point_for_support(bef, {0, 1});
  EXPECT_NEAR(v[0], 0.81649658092772603, 1e-12);
  EXPECT_NEAR(v[1], 0.57735026918962576, 1e-12);
}

TEST(FixedPoint, SingletonIsBasisVector) {
  const auto bef = hb::testing::rotated(4, hb::testing::monomials({1, 2, 3}, 3), 8);
  const auto v = hb::fixed_point_for_support(bef, {2});
  EXPECT_LT(hb::sign_distance(v.vec(), bef.basis().col(2)), 1e-14);
}

TEST(FixedPoint, RejectsBadSupports) {
  const auto bef = hb::testing::quartic(3);
  EXPECT_THROW(hb::fixed_point_for_support(bef, {}), hb::Error);
  EXPECT_THROW(hb::fixed_point_for_support(bef, {0, 0}), hb::Error);
  EXPECT_THROW(hb::fixed_point_for_support(bef, {3}), hb::Error);
}

TEST(Order, CubicSequence) {
  std::vector<double> e;
  for (int n = 0; n <= 3; ++n) e.push_back(std::pow(0.5, std::pow(3.0, n)));
  EXPECT_NEAR(hb::estimate_convergence_order(e), 3.0, 0.01);
}

TEST(Order, LinearSequence) {
  std::vector<double> e;
  for (int n = 0; n < 10; ++n) e.push_back(0.5 * std::pow(0.5, n));
  EXPECT_NEAR(hb::estimate_convergence_order(e), 1.0, 1e-9);
}

TEST(Order, RejectsShortOrInvalid) {
  EXPECT_THROW(hb::estimate_convergence_order({0.5, 0.1, 0.01}), hb::Error);
  EXPECT_THROW(hb::estimate_convergence_order({0.5, -0.1, 0.01, 0.001}), hb::Error);
}

TEST(Order, QuarticRunIsAtLeastCubicish) {
  const auto bef = hb::testing::quartic(8);
  const auto o = hb::testing::exact(bef);
  hb::Rng rng(31);
  for (int k = 0; k < 10; ++k) {
    const auto errs = hb::convergence_errors(o, bef.basis(), hb::sample_sphere(8, rng),
                                             1e-15, 200);
    EXPECT_GE(hb::estimate_convergence_order(errs), 2.5);
  }
}

TEST(AdaptiveAscent, AgreesWithGiStep) {
  const auto bef = hb::testing::rotated(
      5, {hb::ContrastFunction::monomial(1, 4), hb::ContrastFunction::monomial(2, 3),
          hb::ContrastFunction::monomial(0.5, 5)},
      4);
  const auto o = hb::testing::exact(bef);
  hb::Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const auto u = hb::sample_sphere(5, rng);
    if (std::abs(u.vec().dot(o.grad(u.vec()))) < 1e-6) continue;
    EXPECT_LT((hb::adaptive_ascent_step(o, u).vec() - hb::gi_step(o, u).vec()).norm(),
              1e-12);
  }
}

TEST(AdaptiveAscent, PlanarValueAndFixedPoint) {
  const auto o = hb::testing::exact(hb::testing::quartic(2));
  const auto next = hb::adaptive_ascent_step(o, kPlanar);
  EXPECT_NEAR(next[0], 0.921364160958329, 1e-14);
  EXPECT_NEAR(next[1], 0.38870050540429505, 1e-14);
  const auto z = hb::UnitVector::basis(2, 1);
  EXPECT_LT((hb::adaptive_ascent_step(o, z).vec() - z.vec()).norm(), 1e-15);
}

// max_i |h_i'(u_i^2)| never decreases along exact traces.
TEST(Invariant, MonotoneProgress) {
  const auto bef = hb::testing::rotated(
      6, {hb::ContrastFunction::monomial(1, 4), hb::ContrastFunction::monomial(-2, 4),
          hb::ContrastFunction::monomial(0.7, 3), hb::ContrastFunction::monomial(1, 2.5),
          hb::ContrastFunction::monomial(3, 6)},
      19);
  const auto o = hb::testing::exact(bef);
  hb::Rng rng(5);
  for (int k = 0; k < 30; ++k) {
    const auto r = hb::gi_loop(o, hb::sample_sphere(6, rng), 25);
    double last = -1;
    for (const auto& s : r.trace.states) {
      const hb::Vector c = bef.basis().transpose() * s;
      double level = 0;
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        level = std::max(level, std::abs(bef.h()[static_cast<std::size_t>(i)].first(c[i] * c[i])));
      }
      EXPECT_GE(level, last - 1e-12);
      last = level;
    }
  }
}
