#ifndef FGMPC_FGMPC_H_
#define FGMPC_FGMPC_H_

/* C interface to the fgmpc library. Objects are opaque handles owned by the
 * caller and released with the matching *_destroy function. Every fallible
 * call returns an fgmpc_status; on failure fgmpc_last_error() describes the
 * cause (thread-local, valid until the next call on the same thread).
 * Matrices are dense and row-major. */

#include <stddef.h>

#if defined(_WIN32)
#define FGMPC_API __declspec(dllexport)
#else
#define FGMPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fgmpc_status {
  FGMPC_OK = 0,
  FGMPC_ERR_INVALID_ARGUMENT = 1,
  FGMPC_ERR_DIMENSION_MISMATCH = 2,
  FGMPC_ERR_EMPTY_SET = 3,
  FGMPC_ERR_INFEASIBLE = 4,
  FGMPC_ERR_OUTSIDE_ROA = 5,
  FGMPC_ERR_PROJECTION_INTRACTABLE = 6,
  FGMPC_ERR_NO_FEASIBLE_HORIZON = 7,
  FGMPC_ERR_NOT_FINITELY_DETERMINED = 8,
  FGMPC_ERR_ASSUMPTION_VIOLATED = 9,
  FGMPC_ERR_NON_CONVERGENCE = 10,
  FGMPC_ERR_SOLVER_FAILURE = 11,
  FGMPC_ERR_CONFIG = 12,
  FGMPC_ERR_IO = 13,
  FGMPC_ERR_INTERNAL = 14
} fgmpc_status;

typedef struct fgmpc_polytope fgmpc_polytope;
typedef struct fgmpc_config fgmpc_config;
typedef struct fgmpc_controller fgmpc_controller;

FGMPC_API const char* fgmpc_version(void);
FGMPC_API const char* fgmpc_last_error(void);
FGMPC_API const char* fgmpc_status_string(fgmpc_status status);

/* Polytopes {x : A x <= b}. */
FGMPC_API fgmpc_status fgmpc_polytope_create(int dim, int rows, const double* A, const double* b,
                                             fgmpc_polytope** out);
FGMPC_API fgmpc_status fgmpc_polytope_from_box(int dim, const double* lower, const double* upper,
                                               fgmpc_polytope** out);
FGMPC_API fgmpc_status fgmpc_polytope_read_hrep(const char* path, fgmpc_polytope** out);
FGMPC_API fgmpc_status fgmpc_polytope_write_hrep(const fgmpc_polytope* p, const char* path);
FGMPC_API void fgmpc_polytope_destroy(fgmpc_polytope* p);
FGMPC_API int fgmpc_polytope_dim(const fgmpc_polytope* p);
FGMPC_API int fgmpc_polytope_rows(const fgmpc_polytope* p);
/* Copies the stored (normalized) rows; A holds rows * dim entries. */
FGMPC_API fgmpc_status fgmpc_polytope_get(const fgmpc_polytope* p, double* A, double* b);
FGMPC_API fgmpc_status fgmpc_polytope_contains(const fgmpc_polytope* p, const double* x, double tol,
                                               int* result);
/* *result = 1 iff q is a subset of p. */
FGMPC_API fgmpc_status fgmpc_polytope_contains_set(const fgmpc_polytope* p, const fgmpc_polytope* q,
                                                   double tol, int* result);
FGMPC_API fgmpc_status fgmpc_polytope_remove_redundancy(const fgmpc_polytope* p, fgmpc_polytope** out);
/* Projection onto the coordinates listed in keep (ascending order kept). */
FGMPC_API fgmpc_status fgmpc_polytope_project(const fgmpc_polytope* p, const int* keep, int count,
                                              fgmpc_polytope** out);

/* Scenario configuration (JSON). */
FGMPC_API fgmpc_status fgmpc_config_load(const char* path, fgmpc_config** out);
/* base_dir resolves relative file references; NULL means ".". */
FGMPC_API fgmpc_status fgmpc_config_parse(const char* json_text, const char* base_dir, fgmpc_config** out);
FGMPC_API void fgmpc_config_destroy(fgmpc_config* cfg);
FGMPC_API int fgmpc_config_controller_count(const fgmpc_config* cfg);

typedef struct fgmpc_run_options {
  const char* out_dir; /* NULL or "": write no files */
  double tol;          /* <= 0: use the config value */
  int cap;             /* < 0: use the config value */
  int quiet;
} fgmpc_run_options;

FGMPC_API void fgmpc_run_options_init(fgmpc_run_options* opts);

/* Runs "sets", "simulate", "compare" or "nstar". *exit_code receives the
 * process exit code (0 success, 1 audit failure, 2 error, 3 usage). Output
 * goes to stdout/stderr. Returns FGMPC_OK whenever the command ran, even if
 * it failed; inspect *exit_code. */
FGMPC_API fgmpc_status fgmpc_run_command(const fgmpc_config* cfg, const char* verb,
                                         const fgmpc_run_options* opts, int* exit_code);

/* Online controller built from controller entry `index` of a config. */
FGMPC_API fgmpc_status fgmpc_controller_create(const fgmpc_config* cfg, int index, fgmpc_controller** out);
FGMPC_API void fgmpc_controller_destroy(fgmpc_controller* c);
FGMPC_API int fgmpc_controller_nx(const fgmpc_controller* c);
FGMPC_API int fgmpc_controller_nu(const fgmpc_controller* c);
FGMPC_API int fgmpc_controller_nv(const fgmpc_controller* c);
FGMPC_API int fgmpc_controller_horizon(const fgmpc_controller* c);
/* One feedback evaluation: u (nu entries) and the applied reference v (nv
 * entries) for state x and requested reference r. Keeps warm-start memory. */
FGMPC_API fgmpc_status fgmpc_controller_step(fgmpc_controller* c, const double* x, const double* r, double* u,
                                             double* v);
FGMPC_API void fgmpc_controller_reset(fgmpc_controller* c);
/* The set kept invariant by the governed loop, or NULL for plain MPC. The
 * result is a new handle owned by the caller. */
FGMPC_API fgmpc_status fgmpc_controller_admissible_set(const fgmpc_controller* c, fgmpc_polytope** out);

#ifdef __cplusplus
}
#endif

#endif /* FGMPC_FGMPC_H_ */
