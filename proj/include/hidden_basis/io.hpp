#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hidden_basis/bef.hpp"
#include "hidden_basis/recovery.hpp"

namespace hidden_basis {

using Json = nlohmann::json;

/// {"dimension": d, "basis": [[...], ...] | "canonical" |
///  {"random_rotation_seed": s}, "contrasts": [{"kind": "monomial",
///  "weight": w, "power": r}, ...]}. Explicit basis rows are the Z_i.
ExactBef bef_from_json(const Json& spec);

/// d x m orthonormal columns from the "basis" entry of a spec.
Matrix basis_from_json(const Json& basis, Eigen::Index d, Eigen::Index m);

ContrastFunction contrast_from_json(const Json& spec);

/// Overrides the fields of `base` present in `spec`. Unknown keys are errors.
RecoveryConfig recovery_config_from_json(const Json& spec,
                                         RecoveryConfig base = {});
Json to_json(const RecoveryConfig& config);

Json to_json(const MatchReport& report);
std::string match_csv_header();
/// seed,m,d,epsilon,max_error,jumps_used with 17 significant digits.
std::string match_csv_row(std::uint64_t seed, int m, int d, double epsilon,
                          double max_error, int jumps_used);

/// %.17g formatting.
std::string format_double(double x);

/// One sample per row, comma separated, no header.
Matrix read_samples_csv(const std::string& path);
void write_samples_csv(const std::string& path, const Matrix& samples);

}  // namespace hidden_basis
