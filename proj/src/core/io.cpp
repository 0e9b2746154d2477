#include "hidden_basis/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hidden_basis/error.hpp"

namespace hidden_basis {
namespace {

template <typename T>
T get_field(const Json& spec, const char* key, const char* who) {
  require(spec.contains(key), ErrorCode::kConfig,
          std::string(who) + ": missing field '" + key + "'");
  try {
    return spec.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kConfig,
         std::string(who) + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ContrastFunction contrast_from_json(const Json& spec) {
  require(spec.is_object(), ErrorCode::kConfig, "contrast: expected object");
  const auto kind = spec.value("kind", std::string("monomial"));
  require(kind == "monomial", ErrorCode::kConfig,
          "contrast: unknown kind '" + kind + "'");
  const double weight = spec.value("weight", 1.0);
  const double power = get_field<double>(spec, "power", "contrast");
  ContrastFunction g = ContrastFunction::monomial(weight, power);
  if (spec.contains("outer") || spec.contains("inner")) {
    g = g.scaled(spec.value("outer", 1.0), spec.value("inner", 1.0));
  }
  return g;
}

Matrix basis_from_json(const Json& basis, Eigen::Index d, Eigen::Index m) {
  require(d >= 2 && m >= 1 && m <= d, ErrorCode::kConfig,
          "basis: need d >= 2 and 1 <= m <= d");
  if (basis.is_null() || (basis.is_string() && basis == "canonical")) {
    return Matrix::Identity(d, m);
  }
  if (basis.is_object()) {
    const auto seed =
        get_field<std::uint64_t>(basis, "random_rotation_seed", "basis");
    Rng rng(seed);
    return random_rotation(d, rng).leftCols(m);
  }
  require(basis.is_array() && static_cast<Eigen::Index>(basis.size()) == m,
          ErrorCode::kConfig, "basis: expected m rows");
  Matrix out(d, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& row = basis[static_cast<std::size_t>(j)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == d,
            ErrorCode::kConfig, "basis: each row needs d entries");
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, j) = row[static_cast<std::size_t>(i)].get<double>();
    }
  }
  return out;
}

ExactBef bef_from_json(const Json& spec) {
  require(spec.is_object(), ErrorCode::kConfig, "bef: expected object");
  const auto d = get_field<Eigen::Index>(spec, "dimension", "bef");
  const Json contrasts = get_field<Json>(spec, "contrasts", "bef");
  require(contrasts.is_array() && !contrasts.empty(), ErrorCode::kConfig,
          "bef: contrasts must be a non-empty array");
  std::vector<ContrastFunction> gs;
  for (const auto& c : contrasts) gs.push_back(contrast_from_json(c));
  const Json basis = spec.contains("basis") ? spec.at("basis") : Json();
  Matrix z = basis_from_json(basis, d, static_cast<Eigen::Index>(gs.size()));
  return ExactBef(std::move(z), std::move(gs));
}

RecoveryConfig recovery_config_from_json(const Json& spec,
                                         RecoveryConfig base) {
  require(spec.is_object(), ErrorCode::kConfig,
          "recovery config: expected object");
  static const std::set<std::string> known = {
      "sigma", "n1", "n2", "i_max", "m_hat", "tol", "seed", "strict_paper",
      "early_exit_rounds", "weak_gradient_ratio", "record_trace"};
  for (const auto& [key, _] : spec.items()) {
    require(known.count(key) > 0, ErrorCode::kConfig,
            "recovery config: unknown field '" + key + "'");
  }
  const char* who = "recovery config";
  if (spec.contains("sigma")) base.sigma = get_field<double>(spec, "sigma", who);
  if (spec.contains("n1")) base.n1 = get_field<int>(spec, "n1", who);
  if (spec.contains("n2")) base.n2 = get_field<int>(spec, "n2", who);
  if (spec.contains("i_max")) base.i_max = get_field<int>(spec, "i_max", who);
  if (spec.contains("m_hat")) base.m_hat = get_field<int>(spec, "m_hat", who);
  if (spec.contains("tol")) base.tol = get_field<double>(spec, "tol", who);
  if (spec.contains("seed")) {
    base.seed = get_field<std::uint64_t>(spec, "seed", who);
  }
  if (spec.contains("strict_paper")) {
    base.strict_paper = get_field<bool>(spec, "strict_paper", who);
  }
  if (spec.contains("early_exit_rounds")) {
    base.early_exit_rounds = get_field<int>(spec, "early_exit_rounds", who);
  }
  if (spec.contains("weak_gradient_ratio")) {
    base.weak_gradient_ratio =
        get_field<double>(spec, "weak_gradient_ratio", who);
  }
  if (spec.contains("record_trace")) {
    base.record_trace = get_field<bool>(spec, "record_trace", who);
  }
  return base;
}

Json to_json(const RecoveryConfig& config) {
  return Json{{"sigma", config.sigma},
              {"n1", config.n1},
              {"n2", config.n2},
              {"i_max", config.i_max},
              {"m_hat", config.m_hat},
              {"tol", config.tol},
              {"seed", config.seed},
              {"strict_paper", config.strict_paper},
              {"early_exit_rounds", config.early_exit_rounds},
              {"weak_gradient_ratio", config.weak_gradient_ratio},
              {"record_trace", config.record_trace}};
}

Json to_json(const MatchReport& report) {
  Json errors = Json::array();
  for (double e : report.errors) {
    errors.push_back(std::isnan(e) ? Json() : Json(e));
  }
  return Json{{"permutation", report.permutation},
              {"signs", report.signs},
              {"errors", errors},
              {"max_error", report.max_error},
              {"unmatched", report.unmatched}};
}

std::string match_csv_header() {
  return "seed,m,d,epsilon,max_error,jumps_used";
}

std::string match_csv_row(std::uint64_t seed, int m, int d, double epsilon,
                          double max_error, int jumps_used) {
  std::ostringstream out;
  out << seed << ',' << m << ',' << d << ',' << format_double(epsilon) << ','
      << format_double(max_error) << ',' << jumps_used;
  return out.str();
}

Matrix read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t header_cells = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // An optional header: a first line whose cells all start with a letter.
    if (rows.empty() && header_cells == 0 && std::isalpha(static_cast<unsigned char>(line[0]))) {
      header_cells = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      continue;
    }
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        require(cell.find_first_not_of(" \t", used) == std::string::npos,
                ErrorCode::kIo, "trailing characters");
      } catch (const std::exception&) {
        fail(ErrorCode::kIo, path + ":" + std::to_string(line_no) +
                                 ": not a number: '" + cell + "'");
      }
    }
    require(rows.empty() || row.size() == rows.front().size(), ErrorCode::kIo,
            path + ":" + std::to_string(line_no) + ": ragged row");
    require(header_cells == 0 || row.size() == header_cells, ErrorCode::kIo,
            path + ":" + std::to_string(line_no) + ": row does not match the header");
    rows.push_back(std::move(row));
  }
  require(!rows.empty() && !rows.front().empty(), ErrorCode::kIo,
          "'" + path + "' holds no samples");
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return out;
}

void write_samples_csv(const std::string& path, const Matrix& samples) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    out << (j > 0 ? ",x_" : "x_") << j;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(samples(i, j));
    }
    out << '\n';
  }
  require(out.good(), ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace hidden_basis
