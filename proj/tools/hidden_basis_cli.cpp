#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hidden_basis/hidden_basis.h"

using Json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFailed = 2;

// Usage and configuration problems; exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A failed library call inside a repeat.
struct CallError : std::runtime_error {
  CallError(hb_status s, const std::string& msg)
      : std::runtime_error(msg), status(s) {}
  hb_status status;
};

void check(hb_status s) {
  if (s != HB_OK) throw CallError(s, hb_last_error());
}

bool is_config_status(hb_status s) {
  return s == HB_ERR_CONFIG || s == HB_ERR_IO || s == HB_ERR_INVALID_ARGUMENT ||
         s == HB_ERR_DIMENSION_MISMATCH || s == HB_ERR_NOT_CERTIFIED;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string take_string(char* s) {
  std::string out(s);
  hb_string_free(s);
  return out;
}

template <typename T, void (*Destroy)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (ptr) Destroy(ptr);
  }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};
using Problem = Handle<hb_problem, hb_problem_destroy>;
using Solution = Handle<hb_solution, hb_solution_destroy>;
using Bef = Handle<hb_bef, hb_bef_destroy>;
using Oracle = Handle<hb_oracle, hb_oracle_destroy>;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool strict_paper = false;
  bool theoretical = false;
  std::optional<std::string> out;
  std::optional<std::string> summary;
  std::optional<int> repeats;
  int jobs = 1;
  bool strict = false;
};

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

template <typename T>
T config_value(const Json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

struct Context {
  Json cfg;
  std::uint64_t seed = 0;
  int repeats = 1;
  int jobs = 1;
  bool strict = false;
  bool strict_paper = false;
  bool theoretical = false;
  std::optional<std::string> out;
  std::optional<std::string> summary;
};

Context make_context(const Options& opt) {
  Context ctx;
  ctx.cfg = load_config(opt.config_path);
  if (!ctx.cfg.is_object()) throw ConfigError("config must be a JSON object");
  ctx.seed = opt.seed ? *opt.seed : config_value<std::uint64_t>(ctx.cfg, "seed", 0);
  ctx.repeats = opt.repeats ? *opt.repeats : config_value<int>(ctx.cfg, "repeats", 1);
  if (ctx.repeats < 1) throw ConfigError("repeats must be >= 1");
  ctx.jobs = std::max(1, opt.jobs);
  ctx.strict = opt.strict;
  ctx.strict_paper =
      opt.strict_paper || config_value<bool>(ctx.cfg, "strict_paper", false);
  ctx.theoretical = opt.theoretical;
  ctx.out = opt.out;
  if (!ctx.out && ctx.cfg.contains("output")) {
    ctx.out = config_value<std::string>(ctx.cfg, "output", "");
  }
  ctx.summary = opt.summary;
  return ctx;
}

// Runs body(i) for i in [0, n) on `jobs` threads. Results are written by
// index, so output order never depends on scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int threads = std::min(jobs, n);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_text(const std::optional<std::string>& path, const std::string& text,
                std::ostream& fallback) {
  if (!path) {
    fallback << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + *path + "'");
  out << text;
}

void emit(const Context& ctx, const std::string& csv, const Json& summary) {
  write_text(ctx.out, csv, std::cout);
  write_text(ctx.summary, summary.dump(2) + "\n", std::cerr);
}

double median(std::vector<double> xs) {
  xs.erase(std::remove_if(xs.begin(), xs.end(),
                          [](double x) { return std::isnan(x); }),
           xs.end());
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double percentile(std::vector<double> xs, double q) {
  xs.erase(std::remove_if(xs.begin(), xs.end(),
                          [](double x) { return std::isnan(x); }),
           xs.end());
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(xs.size())));
  return xs[std::max<std::size_t>(rank, 1) - 1];
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(); }

// Problem source: a generator spec (sampled per repeat) or a fixed CSV.
struct ProblemSource {
  std::optional<Json> generator;
  std::string input_path;
  std::string input_kind;

  static ProblemSource from(const Json& cfg) {
    ProblemSource src;
    if (cfg.contains("generator")) {
      src.generator = cfg.at("generator");
    } else if (cfg.contains("bef")) {
      Json g = cfg.at("bef");
      g["kind"] = "bef";
      src.generator = g;
    } else if (cfg.contains("input")) {
      const Json& in = cfg.at("input");
      src.input_path = config_value<std::string>(in, "path", "");
      src.input_kind = config_value<std::string>(in, "kind", "");
      if (src.input_path.empty() || src.input_kind.empty()) {
        throw ConfigError("input needs 'path' and 'kind'");
      }
    } else {
      throw ConfigError("config needs 'generator', 'bef' or 'input'");
    }
    return src;
  }

  void make(std::uint64_t seed, Problem& p) const {
    if (generator) {
      check(hb_problem_create(generator->dump().c_str(), seed, p.out()));
    } else {
      check(hb_problem_from_csv(input_path.c_str(), input_kind.c_str(), p.out()));
    }
  }
};

std::string recovery_json(const Context& ctx) {
  Json rec = ctx.cfg.contains("recovery") ? ctx.cfg.at("recovery") : Json("default");
  if (rec.is_string()) rec = Json{{"preset", rec}};
  if (!rec.is_object()) throw ConfigError("recovery must be a preset name or object");
  if (ctx.theoretical) rec["preset"] = "theoretical";
  if (ctx.strict_paper) rec["strict_paper"] = true;
  return rec.dump();
}

std::optional<Json> perturbation_spec(const Context& ctx) {
  if (!ctx.cfg.contains("perturbation")) return std::nullopt;
  return ctx.cfg.at("perturbation");
}

struct RepeatResult {
  std::uint64_t seed = 0;
  double max_error = std::numeric_limits<double>::quiet_NaN();
  int jumps = 0;
  bool failed = true;
  std::string note;
};

// Repeat r: seed_r = derive(root, r); data from derive(seed_r, 1); the
// perturbation field from derive(seed_r, 2) unless the config fixes one.
RepeatResult run_repeat(const Context& ctx, const ProblemSource& src,
                        const std::string& rec, std::optional<Json> perturbation,
                        int index) {
  RepeatResult r;
  r.seed = hb_derive_seed(ctx.seed, static_cast<std::uint64_t>(index));
  Problem problem;
  src.make(hb_derive_seed(r.seed, 1), problem);
  std::string pert;
  if (perturbation) {
    if (!perturbation->contains("seed")) {
      (*perturbation)["seed"] = hb_derive_seed(r.seed, 2);
    }
    pert = perturbation->dump();
  }
  const double failure_error = config_value<double>(ctx.cfg, "failure_error", 0.0);
  Solution sol;
  const hb_status s = hb_problem_solve(problem.get(), rec.c_str(),
                                       perturbation ? pert.c_str() : nullptr,
                                       r.seed, failure_error, sol.out());
  if (s != HB_OK) {
    if (is_config_status(s)) throw ConfigError(hb_last_error());
    r.note = hb_last_error();
    return r;
  }
  int failed = 0;
  check(hb_solution_max_error(sol.get(), &r.max_error));
  check(hb_solution_total_jumps(sol.get(), &r.jumps));
  check(hb_solution_failed(sol.get(), &failed));
  r.failed = failed != 0;
  return r;
}

Json problem_info(const ProblemSource& src, std::uint64_t seed) {
  Problem p;
  src.make(seed, p);
  char* info = nullptr;
  check(hb_problem_info(p.get(), &info));
  return Json::parse(take_string(info));
}

int cmd_recover(const Options& opt) {
  const Context ctx = make_context(opt);
  const ProblemSource src = ProblemSource::from(ctx.cfg);
  const std::string rec = recovery_json(ctx);
  const auto pert = perturbation_spec(ctx);
  const Json info = problem_info(src, hb_derive_seed(hb_derive_seed(ctx.seed, 0), 1));
  double epsilon = 0.0;
  if (pert) epsilon = config_value<double>(*pert, "epsilon", 0.0);

  std::vector<RepeatResult> results(static_cast<std::size_t>(ctx.repeats));
  parallel_for(ctx.repeats, ctx.jobs, [&](int i) {
    results[static_cast<std::size_t>(i)] = run_repeat(ctx, src, rec, pert, i);
  });

  std::ostringstream csv;
  csv << "seed,m,d,epsilon,max_error,jumps_used\n";
  std::vector<double> errors;
  int failures = 0;
  double jumps = 0;
  for (const auto& r : results) {
    csv << r.seed << ',' << info["components"].get<int>() << ','
        << info["dimension"].get<int>() << ',' << fmt(epsilon) << ','
        << fmt(r.max_error) << ',' << r.jumps << '\n';
    errors.push_back(r.max_error);
    failures += r.failed ? 1 : 0;
    jumps += r.jumps;
    if (!r.note.empty()) std::cerr << "repeat seed " << r.seed << ": " << r.note << "\n";
  }
  const double n = static_cast<double>(results.size());
  const Json summary{{"median_max_error", number_or_null(median(errors))},
                     {"failure_rate", failures / n},
                     {"mean_jumps", jumps / n},
                     {"repeats", results.size()}};
  emit(ctx, csv.str(), summary);
  return ctx.strict && failures > 0 ? kExitFailed : kExitOk;
}

double least_squares_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

int cmd_perturb_sweep(const Options& opt) {
  const Context ctx = make_context(opt);
  const ProblemSource src = ProblemSource::from(ctx.cfg);
  const std::string rec = recovery_json(ctx);
  const auto epsilons = config_value<std::vector<double>>(
      ctx.cfg, "epsilons", std::vector<double>{1e-6, 1e-5, 1e-4});
  if (epsilons.empty()) throw ConfigError("epsilons must be non-empty");
  Json base = Json{{"mode", "deterministic"}};
  if (ctx.cfg.contains("perturbation")) base = ctx.cfg.at("perturbation");
  if (ctx.cfg.contains("mode")) base["mode"] = ctx.cfg.at("mode");

  const int per = ctx.repeats;
  const int total = per * static_cast<int>(epsilons.size());
  std::vector<RepeatResult> results(static_cast<std::size_t>(total));
  parallel_for(total, ctx.jobs, [&](int k) {
    Json pert = base;
    pert["epsilon"] = epsilons[static_cast<std::size_t>(k / per)];
    results[static_cast<std::size_t>(k)] = run_repeat(ctx, src, rec, pert, k % per);
  });

  std::ostringstream csv;
  csv << "epsilon,median_error,p90_error\n";
  Json rows = Json::array();
  std::vector<double> log_eps, log_med;
  int failures = 0;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    std::vector<double> errs;
    for (int r = 0; r < per; ++r) {
      const auto& res = results[e * static_cast<std::size_t>(per) + static_cast<std::size_t>(r)];
      errs.push_back(res.max_error);
      failures += res.failed ? 1 : 0;
    }
    const double med = median(errs);
    const double p90 = percentile(errs, 0.9);
    csv << fmt(epsilons[e]) << ',' << fmt(med) << ',' << fmt(p90) << '\n';
    rows.push_back(Json{{"epsilon", epsilons[e]},
                        {"median_error", number_or_null(med)},
                        {"p90_error", number_or_null(p90)}});
    if (epsilons[e] > 0 && med > 0) {
      log_eps.push_back(std::log(epsilons[e]));
      log_med.push_back(std::log(med));
    }
  }
  const Json summary{{"rows", rows},
                     {"loglog_slope", number_or_null(least_squares_slope(log_eps, log_med))},
                     {"failure_rate", failures / static_cast<double>(total)},
                     {"repeats", per}};
  emit(ctx, csv.str(), summary);
  return ctx.strict && failures > 0 ? kExitFailed : kExitOk;
}

Json monomial_bef(int d, double power, const Json& basis) {
  Json contrasts = Json::array();
  for (int i = 0; i < d; ++i) {
    contrasts.push_back(Json{{"kind", "monomial"}, {"weight", 1.0}, {"power", power}});
  }
  return Json{{"dimension", d}, {"basis", basis}, {"contrasts", contrasts}};
}

double measured_order(const hb_oracle* oracle, const std::vector<double>& basis,
                      int d, int m, std::uint64_t seed) {
  std::vector<double> u0(static_cast<std::size_t>(d));
  check(hb_sample_sphere(static_cast<std::size_t>(d), seed, u0.data()));
  std::vector<double> errors(1001);
  std::size_t count = 0;
  check(hb_convergence_errors(oracle, basis.data(), static_cast<std::size_t>(d),
                              static_cast<std::size_t>(m), u0.data(), 1e-15, 1000,
                              errors.data(), errors.size(), &count));
  errors.resize(count);
  double order = std::numeric_limits<double>::quiet_NaN();
  if (hb_estimate_convergence_order(errors.data(), errors.size(), &order) != HB_OK) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return order;
}

int cmd_convergence_order(const Options& opt) {
  const Context ctx = make_context(opt);
  const int d = config_value<int>(ctx.cfg, "dimension", 8);
  const auto powers =
      config_value<std::vector<double>>(ctx.cfg, "powers", std::vector<double>{3, 4});
  const int seeds = opt.repeats ? *opt.repeats : config_value<int>(ctx.cfg, "seeds", 20);
  const double ratio = config_value<double>(ctx.cfg, "matrix_ratio", 0.5);
  const bool with_matrix = config_value<bool>(ctx.cfg, "include_matrix", true);
  const Json basis = ctx.cfg.contains("basis") ? ctx.cfg.at("basis") : Json("canonical");
  if (d < 2 || seeds < 1) throw ConfigError("need dimension >= 2 and seeds >= 1");
  if (!(ratio > 0 && ratio < 1)) throw ConfigError("matrix_ratio must lie in (0, 1)");

  struct Case {
    double power;
    std::unique_ptr<Oracle> oracle;
    std::vector<double> basis;
  };
  std::vector<Case> cases;
  for (double r : powers) {
    Bef bef;
    const hb_status s = hb_bef_create(monomial_bef(d, r, basis).dump().c_str(), bef.out());
    if (s != HB_OK) throw ConfigError(hb_last_error());
    Case c{r, std::make_unique<Oracle>(), std::vector<double>(static_cast<std::size_t>(d * d))};
    check(hb_bef_basis(bef.get(), c.basis.data(), c.basis.size()));
    check(hb_bef_oracle(bef.get(), c.oracle->out()));
    cases.push_back(std::move(c));
  }
  if (with_matrix) {
    // diag(1, ratio, ratio^2 / 2, ...): linear rate lambda_2 / lambda_1.
    std::vector<double> a(static_cast<std::size_t>(d * d), 0.0);
    for (int i = 0; i < d; ++i) {
      a[static_cast<std::size_t>(i * d + i)] =
          i == 0 ? 1.0 : ratio * std::pow(0.5, i - 1);
    }
    Case c{2.0, std::make_unique<Oracle>(), std::vector<double>(static_cast<std::size_t>(d * d), 0.0)};
    for (int i = 0; i < d; ++i) c.basis[static_cast<std::size_t>(i * d + i)] = 1.0;
    check(hb_oracle_matrix(a.data(), static_cast<std::size_t>(d), c.oracle->out()));
    cases.push_back(std::move(c));
  }

  const int total = seeds * static_cast<int>(cases.size());
  std::vector<double> orders(static_cast<std::size_t>(total));
  parallel_for(total, ctx.jobs, [&](int k) {
    const auto& c = cases[static_cast<std::size_t>(k / seeds)];
    orders[static_cast<std::size_t>(k)] =
        measured_order(c.oracle->get(), c.basis, d, d,
                       hb_derive_seed(ctx.seed, static_cast<std::uint64_t>(k % seeds)));
  });

  std::ostringstream csv;
  csv << "power,seed,measured_order\n";
  Json rows = Json::array();
  for (std::size_t c = 0; c < cases.size(); ++c) {
    std::vector<double> these;
    for (int s = 0; s < seeds; ++s) {
      const double o = orders[c * static_cast<std::size_t>(seeds) + static_cast<std::size_t>(s)];
      csv << fmt(cases[c].power) << ',' << s << ',' << fmt(o) << '\n';
      these.push_back(o);
    }
    const auto finite = std::count_if(these.begin(), these.end(),
                                      [](double x) { return std::isfinite(x); });
    rows.push_back(Json{{"power", cases[c].power},
                        {"median_order", number_or_null(median(these))},
                        {"min_order", number_or_null(percentile(these, 0.0))},
                        {"estimated", finite}});
  }
  emit(ctx, csv.str(), Json{{"cases", rows}, {"seeds", seeds}});
  return kExitOk;
}

int cmd_fixed_points(const Options& opt) {
  const Context ctx = make_context(opt);
  Json spec;
  if (ctx.cfg.contains("bef")) {
    spec = ctx.cfg.at("bef");
  } else if (ctx.cfg.contains("generator")) {
    spec = ctx.cfg.at("generator");
    spec.erase("kind");
  } else {
    throw ConfigError("config needs 'bef'");
  }
  const double tol = config_value<double>(ctx.cfg, "tol", 1e-12);
  Bef bef;
  if (hb_bef_create(spec.dump().c_str(), bef.out()) != HB_OK) {
    throw ConfigError(hb_last_error());
  }
  char* text = nullptr;
  const hb_status s = hb_fixed_points(bef.get(), tol, &text);
  if (s != HB_OK) {
    if (is_config_status(s)) throw ConfigError(hb_last_error());
    throw CallError(s, hb_last_error());
  }
  const Json points = Json::parse(take_string(text));
  std::size_t d = 0;
  check(hb_bef_dims(bef.get(), &d, nullptr));

  std::ostringstream csv;
  csv << "support,residual";
  for (std::size_t i = 0; i < d; ++i) csv << ",u_" << i;
  csv << '\n';
  double worst = 0.0;
  for (const auto& p : points) {
    std::string support;
    for (const auto& i : p["support"]) {
      if (!support.empty()) support += ';';
      support += std::to_string(i.get<int>());
    }
    const double residual = p["residual"].get<double>();
    worst = std::max(worst, residual);
    csv << support << ',' << fmt(residual);
    for (const auto& x : p["point"]) csv << ',' << fmt(x.get<double>());
    csv << '\n';
  }
  emit(ctx, csv.str(), Json{{"count", points.size()}, {"max_residual", worst}});
  return ctx.strict && worst > 10 * tol ? kExitFailed : kExitOk;
}

int cmd_gen(const Options& opt) {
  const Context ctx = make_context(opt);
  if (!ctx.cfg.contains("generator")) throw ConfigError("config needs 'generator'");
  if (!ctx.out) throw ConfigError("gen needs --out or 'output'");
  Problem p;
  const hb_status s = hb_problem_create(ctx.cfg.at("generator").dump().c_str(),
                                        hb_derive_seed(hb_derive_seed(ctx.seed, 0), 1),
                                        p.out());
  if (s != HB_OK) throw ConfigError(hb_last_error());
  if (hb_problem_write_samples_csv(p.get(), ctx.out->c_str()) != HB_OK) {
    throw ConfigError(hb_last_error());
  }
  char* info = nullptr;
  check(hb_problem_info(p.get(), &info));
  write_text(ctx.summary, Json::parse(take_string(info)).dump(2) + "\n", std::cerr);
  return kExitOk;
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "Experiment JSON")->required();
  sub->add_option("--seed", opt.seed, "Root seed (overrides the config)");
  sub->add_flag("--strict-paper", opt.strict_paper,
                "Listing-faithful recovery without practical shortcuts");
  sub->add_flag("--theoretical", opt.theoretical,
                "Use the worst-case parameter schedule instead of the practical one");
  sub->add_option("--out", opt.out, "CSV output path (default stdout)");
  sub->add_option("--summary", opt.summary, "JSON summary path (default stderr)");
  sub->add_option("--repeats", opt.repeats, "Number of repeats");
  sub->add_option("--jobs", opt.jobs, "Worker threads for repeats")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--strict", opt.strict, "Exit 2 when any repeat fails");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden basis recovery by gradient iteration"};
  app.require_subcommand(1);
  Options opt;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"recover", "Recover a hidden basis over seeded repeats", cmd_recover},
      {"convergence-order", "Measure the local order of convergence",
       cmd_convergence_order},
      {"perturb-sweep", "Recovery error against oracle perturbation size",
       cmd_perturb_sweep},
      {"fixed-points", "Enumerate the fixed points of a BEF", cmd_fixed_points},
      {"gen", "Write synthetic samples as CSV", cmd_gen},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, opt);
    subs.emplace_back(sub, c.run);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    for (const auto& [sub, run] : subs) {
      if (sub->parsed()) return run(opt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CallError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_status(e.status) ? kExitConfig : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
