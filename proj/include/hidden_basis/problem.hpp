#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "hidden_basis/applications.hpp"
#include "hidden_basis/io.hpp"

namespace hidden_basis {

enum class ProblemKind { kBef, kIca, kTensor, kSpectral, kGmm };

ProblemKind problem_kind_from_string(const std::string& name);
std::string to_string(ProblemKind kind);

struct GmmTruth {
  Vector weights;
  Matrix means;  // columns
  double sigma = 0.0;
};

/// A recovery problem with optional ground truth.
struct Problem {
  ProblemKind kind = ProblemKind::kBef;
  Eigen::Index dimension = 0;
  std::shared_ptr<const ExactBef> bef;       // kBef
  std::optional<OdecoTensor> tensor;         // kTensor
  std::shared_ptr<const Matrix> samples;     // kIca, kGmm, kSpectral
  std::optional<ContrastFunction> contrast;  // kSpectral
  std::optional<Matrix> truth;               // hidden directions as columns
  std::optional<GmmTruth> gmm;               // kGmm
  bool population = false;                   // kGmm from closed-form moments

  /// Directions to recover when the config leaves m_hat unset.
  int components() const;
};

/// Synthetic problem from a generator spec:
///   {"kind": "bef", <bef spec>}
///   {"kind": "ica", "sources": [...], "mixing_seed": s, "n": N}
///   {"kind": "gmm", "weights": [...], "means": [[...]], "sigma": s, "n": N,
///    "population": false}
///   {"kind": "odeco", "dimension": d, "order": r, "weights": [...],
///    "basis": ...}
///   {"kind": "spectral_ideal", "dimension": d, "counts": [...],
///    "scales": [...], "noise": e, "basis": ..., "contrast": {...}}
/// `seed` drives sampling; structural seeds (mixing, rotation) come from the
/// spec itself.
Problem make_problem(const Json& generator, std::uint64_t seed);

/// Problem over user-supplied samples (kIca, kGmm or kSpectral).
Problem problem_from_samples(ProblemKind kind, Matrix samples);

/// ICA source laws, all with zero mean and unit variance.
enum class SourceLaw { kUniform, kLaplace, kRademacher, kGaussian };
SourceLaw source_law_from_string(const std::string& name);
double draw_source(SourceLaw law, Rng& rng);
/// Excess kurtosis of the law.
double source_kurtosis(SourceLaw law);

struct Perturbation {
  double epsilon = 0.0;
  PerturbationMode mode = PerturbationMode::kDeterministic;
  std::uint64_t seed = 0;
};

Perturbation perturbation_from_json(const Json& spec);

/// The oracle handed to the recovery (before any perturbation). For ICA it
/// acts on whitened samples.
GradientOracle problem_oracle(const Problem& problem);

/// A run counts as failed when a repeat direction is found or the matching
/// error exceeds this.
inline constexpr double kDefaultFailureError = 0.1;

struct Solution {
  RecoveredBasis recovery;
  Matrix directions;  // reported directions as columns (unmixed for ICA)
  std::optional<MatchReport> match;
  std::optional<GmmEstimate> gmm;
  /// Matching error against the truth; for GMM the largest relative mean
  /// error. NaN without truth.
  double max_error = 0.0;
  bool failed = false;
};

Solution solve_problem(const Problem& problem, const RecoveryConfig& config,
                       const std::optional<Perturbation>& perturbation = {},
                       double failure_error = kDefaultFailureError);

Json solution_summary(const Solution& solution);

}  // namespace hidden_basis
