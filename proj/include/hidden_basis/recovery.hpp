#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hidden_basis/bef.hpp"
#include "hidden_basis/iteration.hpp"

namespace hidden_basis {

/// Parameters of the jump-and-iterate recovery.
struct RecoveryConfig {
  double sigma = 0.05;  // jump radius
  int n1 = 50;          // warm-start GI steps
  int n2 = 100;         // GI steps after each jump
  int i_max = 40;       // jump rounds
  int m_hat = 1;        // directions to recover
  double tol = 1e-10;
  std::uint64_t seed = 0;

  /// Follow the algorithm listing literally: no GI early stop, no early exit
  /// from the jump loop, no rejection of jumps that land on found directions.
  bool strict_paper = false;
  /// Consecutive converged rounds at the same point before the jump loop
  /// exits early.
  int early_exit_rounds = 3;
  /// Directions whose gradient norm falls below this fraction of the
  /// largest one are flagged weak.
  double weak_gradient_ratio = 1e-3;
  /// Keep every accepted iterate in the diagnostics.
  bool record_trace = false;

  void validate(Eigen::Index dimension) const;

  /// The practical defaults for m directions: sigma 0.05, N1 50, N2 100,
  /// I = 10 m, tol 1e-10.
  static RecoveryConfig practical(int m, std::uint64_t seed = 0);
};

/// |<u, mu_j>| above this against an earlier direction marks a repeat.
inline constexpr double kDuplicateThreshold = 0.5;

struct DirectionDiagnostics {
  int jumps_used = 0;      // jump rounds whose result was accepted
  int jumps_rejected = 0;  // rounds that landed on a found direction
  int gi_steps = 0;
  double residual = 0.0;   // sign-symmetric residual of the last GI step
  double grad_norm = 0.0;  // |grad F(mu)| of the returned direction
  bool early_exit = false;
  bool duplicate = false;
  bool weak = false;
  std::vector<Vector> accepted_iterates;  // only with record_trace
};

struct RecoveredBasis {
  std::vector<UnitVector> directions;
  std::vector<DirectionDiagnostics> diagnostics;

  Matrix as_matrix() const;
  int total_jumps() const;
  bool has_duplicates() const;
};

struct FoundElement {
  UnitVector direction;
  DirectionDiagnostics diagnostics;
};

/// One hidden direction not represented in `found`. The RNG drives the
/// tangent jumps.
FoundElement find_basis_element(const GradientOracle& oracle,
                                const std::vector<UnitVector>& found,
                                const RecoveryConfig& config, Rng& rng);

/// Runs find_basis_element m_hat times, threading the found directions.
/// Direction k draws its jumps from derive_seed(config.seed, k).
RecoveredBasis robust_gi_recovery(const GradientOracle& oracle,
                                  const RecoveryConfig& config);

enum class SecondPhaseBound { kConservative, kTight };

struct TheoreticalParams {
  RecoveryConfig config;
  double tau = 0.0;            // small/large coordinate threshold
  double epsilon_bound = 0.0;  // admissible epsilon for the single-step result
  bool in_guarantee_regime = false;
  long long n_small = 0;       // iterations for small coordinates to decay
  long long n2_conservative = 0;
  long long n2_tight = 0;
};

/// Parameter choices from the recovery guarantees with the universal
/// constants set to 1 (8 for the jump count). Iteration counts saturate at
/// INT_MAX in the returned config. epsilon = 0 is treated as 1e-16.
TheoreticalParams theoretical_params(
    const RobustnessCertificate& cert, int m, int d, double epsilon,
    double failure_probability,
    SecondPhaseBound bound = SecondPhaseBound::kConservative);

struct MatchReport {
  /// permutation[i]: truth column matched to recovered direction i, or -1.
  std::vector<int> permutation;
  std::vector<int> signs;
  /// |s_i mu_i - Z_pi(i)|, NaN for unmatched directions.
  std::vector<double> errors;
  double max_error = 0.0;
  std::vector<int> unmatched;  // recovered indices without a partner
};

/// Greedy assignment on |<mu_i, Z_j>| (largest first, ties by index).
MatchReport match_basis(const std::vector<UnitVector>& recovered,
                        const Matrix& truth);

}  // namespace hidden_basis
