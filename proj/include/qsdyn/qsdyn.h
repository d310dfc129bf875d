/* C interface to the qsdyn library: opaque handles, status codes.
 *
 * Every function returning qs_status leaves a thread-local message that
 * qs_last_error() returns until the next failing call on the same thread.
 * Handles are created by *_create / *_run functions and released with the
 * matching *_destroy; passing NULL to a destroy function is a no-op. */
#ifndef QSDYN_QSDYN_H
#define QSDYN_QSDYN_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(QSDYN_BUILDING)
#    define QSDYN_API __declspec(dllexport)
#  else
#    define QSDYN_API __declspec(dllimport)
#  endif
#else
#  define QSDYN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qs_status {
  QS_OK = 0,
  QS_ERR_INVALID_ARGUMENT = 1,
  QS_ERR_INVALID_STATE = 2,
  QS_ERR_MALFORMED_KERNEL = 3,
  QS_ERR_DEGENERATE_FITNESS = 4,
  QS_ERR_SINGULAR_DENOMINATOR = 5,
  QS_ERR_DEGENERATE = 6,
  QS_ERR_DRIFT_EXCEEDED = 7,
  QS_ERR_STEP_UNDERFLOW = 8,
  QS_ERR_NO_CONVERGENCE = 9,
  QS_ERR_SINGULAR_MATRIX = 10,
  QS_ERR_INACCURATE_INPUTS = 11,
  QS_ERR_IO = 12,
  QS_ERR_INTERNAL = 99
} qs_status;

QSDYN_API const char* qs_status_name(qs_status status);
QSDYN_API const char* qs_last_error(void);
/* Configuration errors (bad parameters/state) vs numerical failures. */
QSDYN_API int qs_status_is_numerical(qs_status status);

/* ---- model ------------------------------------------------------------ */

typedef struct qs_params {
  double f0, f1, f2, Q, Qp;
} qs_params;

typedef struct qs_model qs_model;

QSDYN_API qs_status qs_model_create(const qs_params* params, qs_model** out);
QSDYN_API void qs_model_destroy(qs_model* model);
QSDYN_API qs_status qs_model_params(const qs_model* model, qs_params* out);
QSDYN_API qs_status qs_mean_fitness(const qs_model* model, const double state[3], double* out);
QSDYN_API qs_status qs_vector_field(const qs_model* model, const double state[3], double out[3]);
/* Row-major 3x3. */
QSDYN_API qs_status qs_jacobian(const qs_model* model, const double state[3], double out[9]);

typedef struct qs_general_model qs_general_model;

/* mmu is n*n, column-major by mutation source: mmu[j*n + i] = P(j -> i). */
QSDYN_API qs_status qs_general_model_create(double f0, double f1, double Q, double Qp, size_t n,
                                            const double* f2, const double* qprime,
                                            const double* mmu, qs_general_model** out);
QSDYN_API void qs_general_model_destroy(qs_general_model* model);
QSDYN_API size_t qs_general_model_dimension(const qs_general_model* model);
QSDYN_API qs_status qs_general_vector_field(const qs_general_model* model, const double* state,
                                            size_t len, double* out);
/* (x0, x1, sum of subclones). */
QSDYN_API qs_status qs_aggregate(const double* state, size_t len, double out[3]);

/* ---- equilibria ----------------------------------------------------------- */

typedef enum qs_kind {
  QS_UNSTABLE_DOMINANCE = 0,
  QS_MUTATOR_COEXISTENCE = 1,
  QS_FULL_COEXISTENCE = 2,
  QS_UNRESOLVED = 3
} qs_kind;

typedef enum qs_stability_class {
  QS_ATTRACTOR = 0,
  QS_SADDLE = 1,
  QS_STABILITY_UNRESOLVED = 2
} qs_stability_class;

typedef enum qs_eigen_method { QS_EIGEN_POWER_TRIPLE = 0, QS_EIGEN_FALLBACK = 1 } qs_eigen_method;

typedef struct qs_equilibrium {
  qs_kind kind;
  qs_status status;        /* QS_OK, or why this branch has no fixed point */
  int exists;
  double coords[3];
  double eig_re[3];
  double eig_im[3];
  int eigen_analytic;      /* 1: closed form, 0: numeric */
  qs_eigen_method eigen_method;
  qs_stability_class stability;
  int unstable_dimension;
  char violated[128];      /* "; "-joined failed existence conditions */
} qs_equilibrium;

/* out[0..2] in qs_kind order. */
QSDYN_API qs_status qs_equilibria(const qs_model* model, qs_equilibrium out[3]);
QSDYN_API qs_status qs_critical_mutation_rates(const qs_model* model, double* mu0c, double* mu1c);
/* QS_ERR_DEGENERATE on a bifurcation surface. */
QSDYN_API qs_status qs_classify_analytic(const qs_model* model, qs_kind* out);

/* ---- eigensolver ---------------------------------------------------------- */

typedef struct qs_eigen_report {
  double re[3], im[3]; /* sorted by descending real part */
  double residual[3];
  size_t iterations[3];
  qs_eigen_method method;
} qs_eigen_report;

QSDYN_API qs_status qs_eigen3(const double a[9], qs_eigen_report* out);

/* ---- integration ---------------------------------------------------------- */

typedef struct qs_integrator_config {
  double abs_tol, rel_tol, h_init, h_max, t_max, drift_tol;
} qs_integrator_config;

QSDYN_API void qs_integrator_config_default(qs_integrator_config* cfg);

typedef struct qs_orbit qs_orbit;

typedef struct qs_orbit_summary {
  double final_time;
  int event_fired;
  size_t steps_taken;
  double max_drift;
} qs_orbit_summary;

/* Records rows (t, x...) every sample_interval (> 0), plus t = 0 and the final
 * time. stop_distance > 0 stops once the orbit is that close to stop_target
 * (may be NULL when stop_distance <= 0). */
QSDYN_API qs_status qs_simulate(const qs_model* model, const double s0[3],
                                const qs_integrator_config* cfg, double sample_interval,
                                const double stop_target[3], double stop_distance,
                                qs_orbit** out);
QSDYN_API qs_status qs_simulate_general(const qs_general_model* model, const double* s0,
                                        size_t len, const qs_integrator_config* cfg,
                                        double sample_interval, qs_orbit** out);
QSDYN_API void qs_orbit_destroy(qs_orbit* orbit);
QSDYN_API size_t qs_orbit_rows(const qs_orbit* orbit);
QSDYN_API size_t qs_orbit_width(const qs_orbit* orbit); /* 1 + state dimension */
QSDYN_API qs_status qs_orbit_row(const qs_orbit* orbit, size_t i, double* row, size_t len);
QSDYN_API qs_status qs_orbit_summary_get(const qs_orbit* orbit, qs_orbit_summary* out);
QSDYN_API qs_status qs_orbit_write_csv(const qs_orbit* orbit, const char* path);

/* ---- sweeps and sections -------------------------------------------------- */

typedef struct qs_range {
  double min, max, step;
} qs_range;

typedef struct qs_sweep_spec {
  double Q, Qp, f2;
  qs_range f0, f1;
  double classify_tol, transient_tol;
  double initial[3];
  qs_integrator_config integrator;
} qs_sweep_spec;

typedef enum qs_sweep_kind {
  QS_SWEEP_CLASSIFY = 0,
  QS_SWEEP_DENSITIES = 1,
  QS_SWEEP_TRANSIENTS = 2
} qs_sweep_kind;

typedef struct qs_cell {
  double f0, f1, f0Q, f1Qp;
  qs_kind outcome;
  double densities[3];
  double arrival_time;
  int has_time;           /* transient_time is set (transient sweeps) */
  double transient_time;
  qs_kind analytic_outcome;
  int agreement;
  double max_drift;
  qs_status error;
} qs_cell;

/* Grid over f0 x f1 at Q=0.7, Q'=0.3, f2=0.42 with step 0.01. */
QSDYN_API void qs_sweep_spec_default(qs_sweep_spec* spec);

typedef struct qs_grid qs_grid;

/* threads = 0: hardware concurrency. */
QSDYN_API qs_status qs_sweep_run(const qs_sweep_spec* spec, qs_sweep_kind kind, unsigned threads,
                                 qs_grid** out);
QSDYN_API void qs_grid_destroy(qs_grid* grid);
QSDYN_API size_t qs_grid_size(const qs_grid* grid);
QSDYN_API size_t qs_grid_f0_count(const qs_grid* grid);
QSDYN_API size_t qs_grid_f1_count(const qs_grid* grid);
QSDYN_API qs_status qs_grid_cell(const qs_grid* grid, size_t i, qs_cell* out);
QSDYN_API qs_status qs_grid_write_csv(const qs_grid* grid, const char* path);

typedef enum qs_axis { QS_AXIS_F0Q = 0, QS_AXIS_F1QP = 1 } qs_axis;

typedef struct qs_section qs_section;

/* fixed_axis is the product coordinate held at fixed_value. branch selects
 * the fixed-point branch whose eigenvalues are tracked; QS_UNRESOLVED means
 * the analytic attractor at the first classifiable node. */
QSDYN_API qs_status qs_section_run(const qs_sweep_spec* spec, qs_sweep_kind kind,
                                   qs_axis fixed_axis, double fixed_value, int with_eigen,
                                   qs_kind branch, unsigned threads, qs_section** out);
QSDYN_API void qs_section_destroy(qs_section* section);
QSDYN_API size_t qs_section_size(const qs_section* section);
QSDYN_API qs_status qs_section_cell(const qs_section* section, size_t i, qs_cell* out,
                                    double* abscissa);
/* eig_re may be NULL; returns QS_ERR_INVALID_STATE when no eigenvalues exist
 * for that node. */
QSDYN_API qs_status qs_section_eigen(const qs_section* section, size_t i, double eig_re[3],
                                     qs_eigen_method* method);
QSDYN_API qs_kind qs_section_tracked_branch(const qs_section* section);
QSDYN_API size_t qs_section_bifurcation_count(const qs_section* section);
QSDYN_API double qs_section_bifurcation(const qs_section* section, size_t i);
QSDYN_API qs_status qs_section_write_csv(const qs_section* section, const char* path);

QSDYN_API const char* qs_kind_name(qs_kind kind);

#ifdef __cplusplus
}
#endif

#endif /* QSDYN_QSDYN_H */
