#ifndef HIDDEN_BASIS_H
#define HIDDEN_BASIS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define HB_API __attribute__((visibility("default")))
#else
#define HB_API
#endif

typedef enum hb_status {
  HB_OK = 0,
  HB_ERR_INVALID_ARGUMENT = 1,
  HB_ERR_DIMENSION_MISMATCH = 2,
  HB_ERR_CONFIG = 3,
  HB_ERR_IO = 4,
  HB_ERR_NUMERICAL = 5,
  HB_ERR_DEGENERATE = 6,
  HB_ERR_NOT_CERTIFIED = 7,
  HB_ERR_INTERNAL = 99
} hb_status;

typedef enum hb_perturbation_mode {
  HB_PERTURB_DETERMINISTIC = 0,
  HB_PERTURB_SEEDED_RANDOM = 1
} hb_perturbation_mode;

typedef struct hb_bef hb_bef;
typedef struct hb_oracle hb_oracle;
typedef struct hb_basis hb_basis;
typedef struct hb_problem hb_problem;
typedef struct hb_solution hb_solution;

/* Message of the last failed call on this thread ("" if none). */
HB_API const char* hb_last_error(void);
HB_API const char* hb_version(void);
/* Releases strings returned through char** out-parameters. */
HB_API void hb_string_free(char* s);
/* Child seed `index` of `root` (SplitMix64 mixing). */
HB_API uint64_t hb_derive_seed(uint64_t root, uint64_t index);

/* Vectors are double arrays of length d. Matrices of directions are
   column-major d x k: column j starts at offset j * d. */

/* ---- Basis encoding functions ---- */

/* {"dimension": d, "basis": [[...]] | "canonical" | {"random_rotation_seed": s},
    "contrasts": [{"kind": "monomial", "weight": w, "power": r}, ...]} */
HB_API hb_status hb_bef_create(const char* spec_json, hb_bef** out);
HB_API void hb_bef_destroy(hb_bef* bef);
HB_API hb_status hb_bef_dims(const hb_bef* bef, size_t* d, size_t* m);
HB_API hb_status hb_bef_basis(const hb_bef* bef, double* out, size_t len);
/* grad may be NULL. */
HB_API hb_status hb_bef_eval(const hb_bef* bef, const double* u, size_t d,
                             double* value, double* grad);
HB_API hb_status hb_bef_oracle(const hb_bef* bef, hb_oracle** out);
/* JSON array of {"support": [...], "point": [...], "residual": r}. */
HB_API hb_status hb_fixed_points(const hb_bef* bef, double tol, char** json);

/* ---- Gradient oracles ---- */

/* Symmetric d x d matrix, row-major. */
HB_API hb_status hb_oracle_matrix(const double* a, size_t d, hb_oracle** out);
HB_API hb_status hb_oracle_perturb(const hb_oracle* base, double epsilon,
                                   hb_perturbation_mode mode, uint64_t seed,
                                   hb_oracle** out);
HB_API hb_status hb_oracle_dims(const hb_oracle* oracle, size_t* d);
HB_API hb_status hb_oracle_grad(const hb_oracle* oracle, const double* u,
                                size_t d, double* grad);
HB_API void hb_oracle_destroy(hb_oracle* oracle);

/* ---- Gradient iteration ---- */

HB_API hb_status hb_sample_sphere(size_t d, uint64_t seed, double* out);
HB_API hb_status hb_gi_step(const hb_oracle* oracle, const double* u, size_t d,
                            double* out);
/* order is NaN when it could not be estimated. */
HB_API hb_status hb_run_to_convergence(const hb_oracle* oracle,
                                       const double* u0, size_t d, double tol,
                                       int max_steps, double* limit,
                                       int* steps, int* converged,
                                       double* order);
/* CSV trace of n steps: step,u_0..u_{d-1},grad_norm. */
HB_API hb_status hb_gi_trace_csv(const hb_oracle* oracle, const double* u0,
                                 size_t d, int n, char** csv);
/* Iterates to tol and writes the class distance of every iterate to the
   basis vector nearest the limit. basis is column-major d x m. */
HB_API hb_status hb_convergence_errors(const hb_oracle* oracle,
                                       const double* basis, size_t d, size_t m,
                                       const double* u0, double tol,
                                       int max_steps, double* errors,
                                       size_t capacity, size_t* count);
HB_API hb_status hb_estimate_convergence_order(const double* errors, size_t n,
                                               double* order);

/* ---- Recovery ---- */

/* config_json: NULL or a RecoveryConfig object. m_hat defaults to d. */
HB_API hb_status hb_recover(const hb_oracle* oracle, const char* config_json,
                            hb_basis** out);
HB_API hb_status hb_basis_dims(const hb_basis* basis, size_t* k, size_t* d);
HB_API hb_status hb_basis_direction(const hb_basis* basis, size_t i,
                                    double* out, size_t d);
HB_API hb_status hb_basis_summary(const hb_basis* basis, char** json);
HB_API void hb_basis_destroy(hb_basis* basis);
/* truth is column-major d x m. */
HB_API hb_status hb_match(const hb_basis* basis, const double* truth,
                          size_t d, size_t m, char** report_json);
/* cert_json: {"alpha", "beta", "gamma", "delta"}; bound: "conservative" or
   "tight" (NULL for conservative). */
HB_API hb_status hb_theoretical_config(const char* cert_json, int m, int d,
                                       double epsilon,
                                       double failure_probability,
                                       const char* bound, char** json);

/* ---- Problems ---- */

/* Generator kinds: bef, ica, gmm, odeco, spectral_ideal. */
HB_API hb_status hb_problem_create(const char* generator_json, uint64_t seed,
                                   hb_problem** out);
/* kind: "ica", "gmm" or "spectral". */
HB_API hb_status hb_problem_from_csv(const char* path, const char* kind,
                                     hb_problem** out);
/* {"kind", "dimension", "components", "has_truth", "samples"}. */
HB_API hb_status hb_problem_info(const hb_problem* problem, char** json);
HB_API hb_status hb_problem_write_samples_csv(const hb_problem* problem,
                                              const char* path);
HB_API void hb_problem_destroy(hb_problem* problem);

/* recovery_json: NULL, or an object with an optional "preset" ("default" or
   "theoretical"), "failure_probability" and "bound" for the theoretical
   preset, and any RecoveryConfig field as override. perturbation_json: NULL
   or {"epsilon", "mode": "deterministic" | "random", "seed"}. failure_error
   <= 0 selects the default 0.1. */
HB_API hb_status hb_problem_solve(const hb_problem* problem,
                                  const char* recovery_json,
                                  const char* perturbation_json,
                                  uint64_t seed, double failure_error,
                                  hb_solution** out);
HB_API hb_status hb_solution_max_error(const hb_solution* s, double* error);
HB_API hb_status hb_solution_failed(const hb_solution* s, int* failed);
HB_API hb_status hb_solution_total_jumps(const hb_solution* s, int* jumps);
HB_API hb_status hb_solution_summary(const hb_solution* s, char** json);
HB_API void hb_solution_destroy(hb_solution* s);

#ifdef __cplusplus
}
#endif

#endif
