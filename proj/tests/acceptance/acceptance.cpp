// Acceptance suite: one line per criterion, exit code 1 when any fails.
// Usage: acceptance [--cli <path to hidden-basis>] [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hidden_basis/applications.hpp"
#include "hidden_basis/bef.hpp"
#include "hidden_basis/io.hpp"
#include "hidden_basis/iteration.hpp"
#include "hidden_basis/problem.hpp"
#include "hidden_basis/recovery.hpp"
#include "hidden_basis/reference.hpp"
#include "hidden_basis/seeding.hpp"

namespace hb = hidden_basis;
using hb::Json;
using hb::Matrix;
using hb::Vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

hb::ContrastFunction mono(double w, double r) { return hb::ContrastFunction::monomial(w, r); }

std::vector<hb::ContrastFunction> repeat(const hb::ContrastFunction& g, int m) {
  return std::vector<hb::ContrastFunction>(static_cast<std::size_t>(m), g);
}

hb::ExactBef rotated_bef(Eigen::Index d, std::vector<hb::ContrastFunction> gs, hb::Rng& rng) {
  const auto m = static_cast<Eigen::Index>(gs.size());
  return hb::ExactBef(hb::random_rotation(d, rng).leftCols(m), std::move(gs));
}

hb::GradientOracle exact(const hb::ExactBef& bef) {
  return hb::make_exact_oracle(std::make_shared<const hb::ExactBef>(bef));
}

double nearest_column_distance(const Vector& u, const Matrix& z) {
  double best = INFINITY;
  for (Eigen::Index j = 0; j < z.cols(); ++j) best = std::min(best, hb::sign_distance(u, z.col(j)));
  return best;
}

bool grad_matches(const Vector& g, const Vector& fd) {
  return (g - fd).norm() <= 1e-5 * (1.0 + g.norm());
}

// 1. Analytic gradients against central differences.
Outcome gradient_correctness() {
  struct Family {
    std::string name;
    std::function<hb::ContrastFunction(hb::Rng&)> make;
  };
  std::uniform_real_distribution<double> weight(0.2, 3.0);
  std::bernoulli_distribution flip(0.5);
  auto signed_weight = [&](hb::Rng& rng) { return (flip(rng) ? -1.0 : 1.0) * weight(rng); };
  std::vector<Family> families;
  for (double r : {2.0, 2.5, 3.0, 4.0, 5.0, 6.0}) {
    families.push_back({"monomial r=" + fmt("%g", r),
                        [=](hb::Rng& rng) { return mono(signed_weight(rng), r); }});
  }
  families.push_back({"scaled quartic", [&](hb::Rng& rng) {
                        return mono(1, 4).scaled(signed_weight(rng), weight(rng) / 3.0);
                      }});
  families.push_back({"scaled cubic", [&](hb::Rng& rng) {
                        return mono(1, 3).scaled(signed_weight(rng), weight(rng) / 3.0);
                      }});

  hb::Rng rng(hb::derive_seed(1, 0));
  std::uniform_int_distribution<int> dim(2, 8);
  int checked = 0, bad = 0;
  for (const auto& fam : families) {
    for (int k = 0; k < 200; ++k) {
      const int d = dim(rng);
      std::uniform_int_distribution<int> count(1, d);
      const int m = count(rng);
      std::vector<hb::ContrastFunction> gs;
      for (int i = 0; i < m; ++i) gs.push_back(fam.make(rng));
      const auto bef = rotated_bef(d, gs, rng);
      const Vector u = 0.95 * hb::sample_sphere(d, rng).vec();
      const Vector fd =
          hb::finite_diff_grad([&](const Vector& x) { return hb::eval_f(bef, x); }, u);
      ++checked;
      if (!grad_matches(hb::eval_grad(bef, u), fd)) ++bad;
    }
  }

  // Data-driven oracles expose a value alongside the gradient.
  std::vector<std::pair<std::string, hb::GradientOracle>> oracles;
  {
    Matrix s(2000, 4);
    std::uniform_real_distribution<double> uni(-std::sqrt(3.0), std::sqrt(3.0));
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = uni(rng);
    oracles.emplace_back("ica", hb::ica_oracle(hb::whiten(s).samples));
  }
  for (int r : {3, 4}) {
    oracles.emplace_back("odeco r=" + std::to_string(r),
                         hb::tensor_oracle({Vector::LinSpaced(5, 0.5, 2), hb::random_rotation(5, rng), r}));
  }
  {
    Matrix pts(300, 3);
    std::normal_distribution<double> g;
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = g(rng);
    oracles.emplace_back("spectral", hb::spectral_oracle(pts, hb::default_spectral_contrast()).oracle);
  }
  {
    Matrix a = Matrix::Random(5, 5);
    oracles.emplace_back("matrix", hb::matrix_oracle(a + a.transpose()));
  }
  {
    const Matrix means = (Matrix(2, 2) << 5, 0, 1, 4).finished();
    const auto mom = hb::population_moments((Vector(2) << 0.4, 0.6).finished(), means, 1.0);
    oracles.emplace_back("gmm", hb::gmm_oracle(mom, Matrix::Identity(2, 2) * 0.3, 1.0));
  }
  for (const auto& [name, o] : oracles) {
    for (int k = 0; k < 200; ++k) {
      const Vector u = 0.95 * hb::sample_sphere(o.dimension(), rng).vec();
      const Vector fd = hb::finite_diff_grad([&](const Vector& x) { return o.value(x); }, u);
      ++checked;
      if (!grad_matches(o.grad(u), fd)) ++bad;
    }
  }
  return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                        " pairs within 1e-5 relative over " +
                        std::to_string(families.size() + oracles.size()) + " families"};
}

// 2. Grid scan: maxima of |F| only next to +-Z_i.
Outcome maxima_structure() {
  hb::Rng rng(hb::derive_seed(2, 0));
  std::uniform_real_distribution<double> weight(0.3, 3.0);
  std::bernoulli_distribution cubic(0.5);
  int configs = 0, spurious = 0, missed = 0;
  std::size_t maxima = 0;
  for (int d : {2, 3}) {
    for (int k = 0; k < 8; ++k) {
      std::vector<hb::ContrastFunction> gs;
      for (int i = 0; i < d; ++i) gs.push_back(mono(weight(rng), cubic(rng) ? 3 : 4));
      if (k == 0) gs = {mono(1, 3), mono(2.5, 4), mono(0.5, 3)};
      gs.resize(static_cast<std::size_t>(d), mono(1, 4));
      const auto bef = rotated_bef(d, gs, rng);
      const auto scan = hb::grid_maxima_scan(bef, d == 2 ? 3600 : 150);
      ++configs;
      spurious += static_cast<int>(scan.spurious.size());
      maxima += scan.maxima.size();
      for (bool h : scan.hit) missed += h ? 0 : 1;
    }
  }
  return {spurious == 0 && missed == 0,
          std::to_string(configs) + " mixed quartic/cubic BEFs, " + std::to_string(maxima) +
              " maxima, " + std::to_string(spurious) + " spurious, " + std::to_string(missed) +
              " basis vectors missed"};
}

// 3. Fixed points: 2^m - 1 classes and the two closed-form examples.
Outcome fixed_point_enumeration() {
  hb::Rng rng(hb::derive_seed(3, 0));
  std::uniform_real_distribution<double> weight(0.3, 3.0);
  bool ok = true;
  double worst = 0;
  for (int m = 1; m <= 6; ++m) {
    std::vector<hb::ContrastFunction> gs;
    for (int i = 0; i < m; ++i) gs.push_back(mono(weight(rng), i % 3 == 2 ? 3 : 4));
    const auto bef = rotated_bef(std::max(m, 2) + 1, gs, rng);
    const auto o = exact(bef);
    const auto pts = hb::enumerate_fixed_points(bef, 1e-12);
    ok = ok && pts.size() == (std::size_t{1} << m) - 1;
    for (const auto& p : pts) {
      worst = std::max(worst, hb::sign_distance(hb::gi_step(o, p.point).vec(), p.point.vec()));
    }
  }
  const hb::ExactBef sym(Matrix::Identity(2, 2), repeat(mono(1, 4), 2));
  const auto v = hb::fixed_point_for_support(sym, {0, 1});
  const double sym_err = std::max(std::abs(v[0] - M_SQRT1_2), std::abs(v[1] - M_SQRT1_2));
  const hb::ExactBef weighted(Matrix::Identity(2, 2), {mono(1, 4), mono(2, 4)});
  const auto w = hb::fixed_point_for_support(weighted, {0, 1});
  const double w_err =
      std::max(std::abs(w[0] - std::sqrt(2.0 / 3.0)), std::abs(w[1] - std::sqrt(1.0 / 3.0)));
  ok = ok && worst <= 1e-8 && sym_err <= 1e-10 && w_err <= 1e-8;
  return {ok, "counts 2^m-1 for m=1..6, max residual " + fmt("%.2e", worst) +
                  ", symmetric err " + fmt("%.1e", sym_err) + ", (1,2)-weight err " +
                  fmt("%.1e", w_err)};
}

// 4. Every random start converges to a basis vector; all are reached.
Outcome global_attraction() {
  const hb::ExactBef bef(Matrix::Identity(8, 8), repeat(mono(1, 4), 8));
  const auto o = exact(bef);
  hb::Rng rng(hb::derive_seed(4, 0));
  int converged = 0;
  std::vector<int> hits(8, 0);
  for (int k = 0; k < 1000; ++k) {
    const auto rep = hb::run_to_convergence(o, hb::sample_sphere(8, rng), 1e-8, 1000);
    Eigen::Index i = 0;
    rep.limit.vec().cwiseAbs().maxCoeff(&i);
    if (rep.converged && nearest_column_distance(rep.limit.vec(), bef.basis()) <= 1e-8) {
      ++converged;
      ++hits[static_cast<std::size_t>(i)];
    }
  }
  const int least = *std::min_element(hits.begin(), hits.end());
  return {converged == 1000 && least > 0,
          std::to_string(converged) + "/1000 converged to +-e_i, least-visited e_i hit " +
              std::to_string(least) + " times"};
}

// 5. Local order of convergence.
Outcome superlinear_order() {
  const int d = 8, seeds = 20;
  std::ostringstream detail;
  bool ok = true;
  for (double r : {3.0, 4.0}) {
    hb::Rng rng(hb::derive_seed(5, static_cast<std::uint64_t>(r)));
    const auto bef = rotated_bef(d, repeat(mono(1, r), d), rng);
    const auto o = exact(bef);
    std::vector<double> orders;
    for (int s = 0; s < seeds; ++s) {
      const auto errs = hb::convergence_errors(o, bef.basis(), hb::sample_sphere(d, rng), 1e-15, 1000);
      orders.push_back(hb::estimate_convergence_order(errs));
    }
    const double lo = *std::min_element(orders.begin(), orders.end());
    ok = ok && lo >= r - 1.5;
    detail << "r=" << r << " min " << fmt("%.3f", lo) << " median " << fmt("%.3f", median(orders))
           << "; ";
  }
  // Matrix border case: diag(1, 0.5, 0.25, ...), linear with rate 0.5.
  Vector diag(d);
  for (int i = 0; i < d; ++i) diag[i] = std::pow(0.5, i);
  const auto o = hb::matrix_oracle(diag.asDiagonal().toDenseMatrix());
  hb::Rng rng(hb::derive_seed(5, 2));
  std::vector<double> orders, rates;
  for (int s = 0; s < seeds; ++s) {
    const auto errs =
        hb::convergence_errors(o, Matrix::Identity(d, d), hb::sample_sphere(d, rng), 1e-15, 1000);
    orders.push_back(hb::estimate_convergence_order(errs));
    std::vector<double> tail;
    for (std::size_t n = 1; n < errs.size(); ++n) {
      if (errs[n] > 1e-12 && errs[n - 1] < 1e-3) tail.push_back(errs[n] / errs[n - 1]);
    }
    rates.push_back(median(tail));
  }
  const double lo = *std::min_element(orders.begin(), orders.end());
  const double hi = *std::max_element(orders.begin(), orders.end());
  const double rate = median(rates);
  ok = ok && lo >= 0.8 && hi <= 1.2 && std::abs(rate - 0.5) <= 0.05;
  detail << "matrix order in [" << fmt("%.3f", lo) << ", " << fmt("%.3f", hi) << "], rate "
         << fmt("%.4f", rate) << " vs lambda2/lambda1 0.5";
  return {ok, detail.str()};
}

// 6. Gradient iteration is the matrix / tensor power method.
Outcome power_method_equivalence() {
  hb::Rng rng(hb::derive_seed(6, 0));
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + k % 5;
    Matrix a = Matrix::Random(d, d);
    a = (a + a.transpose()).eval();
    const auto o = hb::matrix_oracle(a);
    const auto u = hb::sample_sphere(d, rng);
    const Vector au = a * u.vec();
    worst = std::max(worst, (hb::gi_step(o, u).vec() - au / au.norm()).norm());
  }
  for (int r : {3, 4}) {
    for (int k = 0; k < 100; ++k) {
      const int d = 2 + k % 5;
      std::uniform_real_distribution<double> w(-2, 2);
      Vector weights(d);
      for (int i = 0; i < d; ++i) weights[i] = w(rng);
      const hb::OdecoTensor t{weights, hb::random_rotation(d, rng), r};
      const auto entries = hb::dense_tensor(t);
      const auto u = hb::sample_sphere(d, rng);
      const Vector tu = hb::dense_tensor_apply(entries, r, u.vec());
      worst = std::max(worst, (hb::gi_step(hb::tensor_oracle(t), u).vec() - tu / tu.norm()).norm());
    }
  }
  return {worst <= 1e-10, "300 queries (matrix, r=3, r=4), max deviation " + fmt("%.2e", worst)};
}

// 7. Default recovery on exact quartics.
Outcome robust_recovery_exact() {
  std::ostringstream detail;
  bool ok = true;
  for (int d : {4, 6, 8}) {
    std::vector<double> errors;
    int failures = 0;
    for (int s = 0; s < 100; ++s) {
      const std::uint64_t seed = hb::derive_seed(7, static_cast<std::uint64_t>(100 * d + s));
      hb::Rng rng(hb::derive_seed(seed, 1));
      const auto bef = rotated_bef(d, repeat(mono(1, 4), d), rng);
      const auto rec = hb::robust_gi_recovery(exact(bef), hb::RecoveryConfig::practical(d, seed));
      const double err = hb::match_basis(rec.directions, bef.basis()).max_error;
      errors.push_back(err);
      if (rec.has_duplicates() || !(err <= hb::kDefaultFailureError)) ++failures;
    }
    const double med = median(errors);
    ok = ok && failures == 0 && med <= 1e-7;
    detail << "d=" << d << " failures " << failures << "/100 median " << fmt("%.1e", med) << "; ";
  }
  return {ok, detail.str()};
}

// 8. Error linear in the oracle perturbation.
Outcome perturbation_bound() {
  const int d = 4;
  const double beta = 2, delta = 1;
  std::vector<double> log_eps, log_err;
  std::ostringstream detail;
  bool ok = true;
  for (double eps : {1e-6, 1e-5, 1e-4}) {
    std::vector<double> errors;
    for (int s = 0; s < 50; ++s) {
      const std::uint64_t seed = hb::derive_seed(8, static_cast<std::uint64_t>(s));
      hb::Rng rng(hb::derive_seed(seed, 1));
      const auto bef = rotated_bef(d, repeat(mono(1, 4), d), rng);
      const auto o = hb::perturb_oracle(exact(bef), eps, hb::PerturbationMode::kDeterministic,
                                        hb::derive_seed(seed, 2));
      const auto rec = hb::robust_gi_recovery(o, hb::RecoveryConfig::practical(d, seed));
      errors.push_back(hb::match_basis(rec.directions, bef.basis()).max_error);
    }
    const double med = median(errors);
    ok = ok && med <= 10 * delta * eps / beta;
    log_eps.push_back(std::log(eps));
    log_err.push_back(std::log(med));
    detail << "eps " << fmt("%.0e", eps) << " median/eps " << fmt("%.3f", med / eps) << "; ";
  }
  const double mx = (log_eps[0] + log_eps[1] + log_eps[2]) / 3;
  const double my = (log_err[0] + log_err[1] + log_err[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (log_eps[i] - mx) * (log_err[i] - my);
    sxx += (log_eps[i] - mx) * (log_eps[i] - mx);
  }
  const double slope = sxy / sxx;
  ok = ok && std::abs(slope - 1.0) <= 0.3;
  detail << "bound 10*delta/beta = 5, log-log slope " << fmt("%.4f", slope);
  return {ok, detail.str()};
}

// 9. max_i |h_i'(u_i^2)| is non-decreasing along exact traces.
Outcome monotone_progress() {
  hb::Rng rng(hb::derive_seed(9, 0));
  std::uniform_real_distribution<double> weight(0.3, 3.0);
  double worst_drop = 0;
  long long states = 0;
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + k % 7;
    std::vector<hb::ContrastFunction> gs;
    for (int i = 0; i < d; ++i) gs.push_back(mono(weight(rng), 4));
    const auto bef = rotated_bef(d, gs, rng);
    const auto trace = hb::gi_loop(exact(bef), hb::sample_sphere(d, rng), 30).trace;
    double last = 0;
    for (const auto& s : trace.states) {
      const Vector c = bef.basis().transpose() * s;
      double level = 0;
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        level = std::max(level, std::abs(bef.h()[static_cast<std::size_t>(i)].first(c[i] * c[i])));
      }
      worst_drop = std::max(worst_drop, last - level);
      last = level;
      ++states;
    }
  }
  return {worst_drop <= 1e-12, "100 traces, " + std::to_string(states) +
                                   " states, largest decrease " + fmt("%.2e", worst_drop)};
}

double max_angle_degrees(const hb::Solution& sol) {
  double worst = 0;
  for (double e : sol.match->errors) worst = std::max(worst, 2 * std::asin(std::min(1.0, e / 2)));
  return worst * 180 / std::numbers::pi;
}

// 10. ICA on uniform sources.
Outcome ica_desk_scale() {
  std::vector<double> medians;
  int failures = 0;
  for (int n : {100000, 400000}) {
    std::vector<double> angles;
    for (int s = 0; s < 20; ++s) {
      const std::uint64_t seed = hb::derive_seed(10, static_cast<std::uint64_t>(s));
      const Json gen = {{"kind", "ica"},
                        {"sources", {"uniform", "uniform", "uniform", "uniform"}},
                        {"mixing_seed", hb::derive_seed(seed, 3)},
                        {"n", n}};
      const auto problem = hb::make_problem(gen, hb::derive_seed(seed, 1));
      const auto sol = hb::solve_problem(problem, hb::RecoveryConfig::practical(4, seed));
      failures += sol.failed ? 1 : 0;
      angles.push_back(max_angle_degrees(sol));
    }
    medians.push_back(median(angles));
  }
  const double shrink = medians[0] / medians[1];
  const bool ok = failures == 0 && medians[0] <= 3.0 && shrink >= 1.2 && shrink <= 1.8;
  return {ok, "median max angle " + fmt("%.3f", medians[0]) + " deg at N=1e5, " +
                  fmt("%.3f", medians[1]) + " deg at N=4e5, shrink " + fmt("%.3f", shrink) +
                  " (target [1.2, 1.8]), failures " + std::to_string(failures)};
}

// 11. Spherical GMM.
Outcome gmm_desk_scale() {
  const Vector weights = (Vector(2) << 0.4, 0.6).finished();
  const Matrix means = (Matrix(2, 2) << 5, 0, 0, 5).finished();  // separation 7.07 sigma
  const double sigma = 1.0;
  std::vector<double> sigma_err, mean_err, weight_err;
  for (int s = 0; s < 10; ++s) {
    const std::uint64_t seed = hb::derive_seed(11, static_cast<std::uint64_t>(s));
    const Json gen = {{"kind", "gmm"},
                      {"weights", {0.4, 0.6}},
                      {"means", {{5, 0}, {0, 5}}},
                      {"sigma", sigma},
                      {"n", 200000}};
    const auto problem = hb::make_problem(gen, hb::derive_seed(seed, 1));
    const auto est = hb::gmm_recover(hb::sample_moments(problem.samples),
                                     hb::RecoveryConfig::practical(2, seed));
    sigma_err.push_back(std::abs(est.sigma - sigma) / sigma);
    double me = 0, we = 0;
    for (int j = 0; j < 2; ++j) {
      int best = 0;
      for (int i = 1; i < 2; ++i) {
        if ((est.means.col(i) - means.col(j)).norm() < (est.means.col(best) - means.col(j)).norm()) best = i;
      }
      me = std::max(me, (est.means.col(best) - means.col(j)).norm() / means.col(j).norm());
      we = std::max(we, std::abs(est.weights[best] - weights[j]));
    }
    mean_err.push_back(me);
    weight_err.push_back(we);
  }
  const auto pop = hb::gmm_recover(hb::population_moments(weights, means, sigma),
                                   hb::RecoveryConfig::practical(2, 5));
  double pop_err = std::abs(pop.sigma - sigma);
  for (int j = 0; j < 2; ++j) {
    double best = INFINITY;
    for (int i = 0; i < 2; ++i) best = std::min(best, (pop.means.col(i) - means.col(j)).norm());
    pop_err = std::max(pop_err, best);
  }
  const double ms = median(sigma_err), mm = median(mean_err), mw = median(weight_err);
  const bool ok = ms <= 0.05 && mm <= 0.1 && mw <= 0.1 && pop_err <= 1e-8;
  return {ok, "median sigma rel err " + fmt("%.4f", ms) + ", mean rel err " + fmt("%.4f", mm) +
                  ", weight abs err " + fmt("%.4f", mw) + ", population err " +
                  fmt("%.1e", pop_err)};
}

// 12. Spectral embedding in the ideal and perturbed cases.
Outcome spectral_ideal() {
  double ideal = 0, noisy = 0;
  for (int s = 0; s < 10; ++s) {
    const std::uint64_t seed = hb::derive_seed(12, static_cast<std::uint64_t>(s));
    Json gen = {{"kind", "spectral_ideal"},
                {"dimension", 2},
                {"counts", {40, 60}},
                {"scales", {1.0, 0.7}},
                {"basis", {{"random_rotation_seed", hb::derive_seed(seed, 3)}}}};
    const auto config = hb::RecoveryConfig::practical(2, seed);
    ideal = std::max(ideal, hb::solve_problem(hb::make_problem(gen, hb::derive_seed(seed, 1)), config).max_error);
    gen["noise"] = 1e-3;
    noisy = std::max(noisy, hb::solve_problem(hb::make_problem(gen, hb::derive_seed(seed, 1)), config).max_error);
  }
  return {ideal <= 1e-8 && noisy <= 5e-3, "10 seeds, ideal max err " + fmt("%.1e", ideal) +
                                              ", noise 1e-3 max err " + fmt("%.1e", noisy)};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 13. CLI runs repeat byte for byte, also with parallel repeats.
Outcome determinism(const std::string& cli) {
  if (cli.empty() || !std::filesystem::exists(cli)) return {false, "CLI binary not found"};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("hb_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::filesystem::create_directories(dir);
  Json contrasts = Json::array();
  for (int i = 0; i < 5; ++i) contrasts.push_back({{"kind", "monomial"}, {"weight", 1 + i}, {"power", 4}});
  const Json bef = {{"kind", "bef"}, {"dimension", 5}, {"contrasts", contrasts},
                    {"basis", {{"random_rotation_seed", 4}}}};
  struct Run {
    std::string command;
    Json config;
  };
  const std::vector<Run> runs = {
      {"recover", {{"generator", bef}, {"repeats", 12}, {"perturbation", {{"epsilon", 1e-5}, {"mode", "random"}}}}},
      {"recover", {{"generator", {{"kind", "ica"}, {"sources", {"uniform", "laplace", "uniform"}},
                                  {"mixing_seed", 2}, {"n", 5000}}}, {"repeats", 6}}},
      {"perturb-sweep", {{"generator", bef}, {"repeats", 8}, {"epsilons", {1e-6, 1e-4}}}},
      {"convergence-order", {{"dimension", 5}, {"seeds", 6}}},
  };
  int identical = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto cfg = dir / ("run" + std::to_string(k) + ".json");
    std::ofstream(cfg) << runs[k].config.dump();
    std::vector<std::string> outputs;
    for (const char* jobs : {"1", "1", "4"}) {
      const auto out = dir / ("out" + std::to_string(k) + "_" + std::to_string(outputs.size()) + ".csv");
      const std::string cmd = "\"" + cli + "\" " + runs[k].command + " --config \"" + cfg.string() +
                              "\" --seed 1234 --jobs " + jobs + " --out \"" + out.string() +
                              "\" --summary \"" + (dir / "summary.json").string() + "\"";
      if (std::system(cmd.c_str()) != 0) {
        std::filesystem::remove_all(dir);
        return {false, "command failed: " + cmd};
      }
      outputs.push_back(read_file(out));
    }
    if (!outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2]) ++identical;
  }
  std::filesystem::remove_all(dir);
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) +
              " configs byte-identical across two serial runs and --jobs 4"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      only.insert(std::atoi(a.c_str()));
    }
  }
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 5, gradient_correctness},
      {2, "maxima structure", 30, maxima_structure},
      {3, "fixed-point enumeration", 0, fixed_point_enumeration},
      {4, "global attraction", 10, global_attraction},
      {5, "superlinear order", 0, superlinear_order},
      {6, "power-method equivalences", 0, power_method_equivalence},
      {7, "robust recovery, exact oracle", 60, robust_recovery_exact},
      {8, "perturbation bound", 0, perturbation_bound},
      {9, "monotone progress", 0, monotone_progress},
      {10, "ICA desk scale", 120, ica_desk_scale},
      {11, "GMM desk scale", 0, gmm_desk_scale},
      {12, "spectral ideal case", 0, spectral_ideal},
      {13, "determinism", 0, [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = out.pass;
    std::string timing = fmt("%.2f s", secs);
    if (c.budget_s > 0) {
      timing += fmt(" / %.0f s", c.budget_s);
      pass = pass && secs < c.budget_s;
    }
    std::printf("criterion %2d %s  %s: %s [%s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                out.detail.c_str(), timing.c_str());
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
