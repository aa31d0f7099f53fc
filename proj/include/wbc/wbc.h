/* C interface of the barycenter solver library. All objects are opaque
 * handles owned by the caller and released with the matching _free call.
 * Every function that can fail returns a wbc_status; on failure the
 * message is available from wbc_last_error() on the same thread. Strings
 * returned through char** are allocated by the library and released with
 * wbc_string_free. Matrices are column-major. */
#ifndef WBC_WBC_H
#define WBC_WBC_H

#include <stddef.h>
#include <stdint.h>

#if defined(WBC_BUILDING_LIBRARY)
#define WBC_API __attribute__((visibility("default")))
#else
#define WBC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wbc_status {
  WBC_OK = 0,
  WBC_ERR_INVALID_ARGUMENT = 1,
  WBC_ERR_SHAPE = 2,
  WBC_ERR_PARSE = 3,
  WBC_ERR_NUMERICAL = 4,
  WBC_ERR_SIZE_LIMIT = 5,
  WBC_ERR_IO = 6,
  WBC_ERR_INTERNAL = 7
} wbc_status;

typedef struct wbc_instance wbc_instance;
typedef struct wbc_options wbc_options;
typedef struct wbc_result wbc_result;

/* Generator parameters. Unused fields are ignored by a given case. */
typedef struct wbc_generate_params {
  size_t N;
  size_t m;
  size_t m_prime;
  size_t d;
  double sparsity; /* case 2 only */
  size_t n;        /* gaussian pair grid size */
  uint64_t seed;
} wbc_generate_params;

typedef struct wbc_summary {
  int converged;
  size_t iterations;
  double objective;
  double eta_feas;
  double max_residual; /* max of eta_P, eta_D, eta_gap on the stopping scale */
  double wall_time;
} wbc_summary;

WBC_API const char* wbc_last_error(void);
WBC_API const char* wbc_status_name(wbc_status status);
WBC_API const char* wbc_version(void);
WBC_API void wbc_string_free(char* s);

/* ---- instances ---- */
WBC_API wbc_status wbc_instance_load(const char* path, wbc_instance** out);
WBC_API wbc_status wbc_instance_parse(const char* json, wbc_instance** out);
/* costs[t] is m x m_t column-major; gammas may be NULL (1/N each). */
WBC_API wbc_status wbc_instance_from_costs(size_t N, size_t m, const size_t* m_t,
                                           const double* const* costs,
                                           const double* const* marginals,
                                           const double* gammas, wbc_instance** out);
/* kind: "1", "2", "3" or "gauss-pair". */
WBC_API wbc_status wbc_instance_generate(const char* kind, const wbc_generate_params* params,
                                         wbc_instance** out);
/* Discretized true barycenter of the gaussian pair, length n. */
WBC_API wbc_status wbc_gaussian_pair_truth(size_t n, double* out, size_t len);
WBC_API wbc_status wbc_instance_dims(const wbc_instance* inst, size_t* N, size_t* m);
WBC_API wbc_status wbc_instance_marginal_size(const wbc_instance* inst, size_t t, size_t* m_t);
/* indent < 0 writes compact JSON. */
WBC_API wbc_status wbc_instance_to_json(const wbc_instance* inst, int indent, char** out);
WBC_API wbc_status wbc_instance_save(const wbc_instance* inst, const char* path);
WBC_API void wbc_instance_free(wbc_instance* inst);

/* ---- options ----
 * method: "sgs", "ibp", "badmm" or "oracle". Keys for wbc_options_set:
 *   tol, max_iter, threads, presolve (0/1), trace (0/1)
 *   sgs:   beta0, tau, check_every, penalty_update (0/1), scaling (0/1)
 *   ibp:   epsilon, ibp_mode (auto/standard/log), ibp_init (projected/uniform),
 *          normalize_costs (0/1)
 *   badmm: rho, w_rule (R1/R2/geometric)
 *   free support: m, seed, outer_tol, max_outer, inner_max_iter, warm_start (0/1)
 * Setting a key that belongs to another method is an invalid argument. */
WBC_API wbc_status wbc_options_create(const char* method, wbc_options** out);
WBC_API wbc_status wbc_options_set(wbc_options* opts, const char* key, const char* value);
WBC_API void wbc_options_free(wbc_options* opts);

/* ---- solving ---- */
WBC_API wbc_status wbc_solve(const wbc_instance* inst, const wbc_options* opts, wbc_result** out);
/* Alternating minimization over the support points of `inst`'s input
 * distributions; `opts` selects the inner solver and the outer keys. */
WBC_API wbc_status wbc_free_support(const wbc_instance* inst, const wbc_options* opts,
                                    wbc_result** out);
WBC_API wbc_status wbc_result_summary(const wbc_result* res, wbc_summary* out);
WBC_API wbc_status wbc_result_weights(const wbc_result* res, double* out, size_t len);
WBC_API wbc_status wbc_result_plan(const wbc_result* res, size_t t, double* out, size_t len);
/* Barycenter support points (d x m) of a free-support result. */
WBC_API wbc_status wbc_result_supports(const wbc_result* res, size_t* d, double* out,
                                       size_t len);
WBC_API wbc_status wbc_result_report_json(const wbc_result* res, char** out);
WBC_API wbc_status wbc_result_solution_json(const wbc_result* res, int emit_plans, char** out);
WBC_API wbc_status wbc_result_trace_csv(const wbc_result* res, char** out);
WBC_API void wbc_result_free(wbc_result* res);

/* ---- experiments ---- */
/* Runs each option set on each instance. Outputs are CSV and markdown.
 * Methods run one after another unless parallel_methods is nonzero. */
WBC_API wbc_status wbc_compare(const wbc_instance* const* instances, size_t instance_count,
                               const wbc_options* const* methods, const char* const* labels,
                               size_t method_count, int parallel_methods, char** csv,
                               char** markdown);
/* sGS-ADMM timing over ascending Ns on Case 1 instances; `opts` supplies
 * max_iter and threads. slope is NaN for a single N. */
WBC_API wbc_status wbc_bench_scaling(const size_t* Ns, size_t count, size_t m, size_t m_prime,
                                     size_t d, uint64_t seed, const wbc_options* opts,
                                     size_t repeats, char** csv, double* slope);

/* ---- utilities ---- */
WBC_API wbc_status wbc_project_simplex(const double* v, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
