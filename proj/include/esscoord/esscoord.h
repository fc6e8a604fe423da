/* Shared-battery day-ahead scheduling: C interface.
 *
 * Handles are opaque and owned by the caller; free them with the matching
 * *_free function. Every call that can fail returns an esc_status, and the
 * message for the most recent failure on the calling thread is available
 * from esc_last_error(). Strings returned through char** are released with
 * esc_string_free(). Matrices are row-major, users by slots. */
#ifndef ESSCOORD_ESSCOORD_H
#define ESSCOORD_ESSCOORD_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(ESC_BUILDING_LIBRARY)
#    define ESC_API __declspec(dllexport)
#  else
#    define ESC_API __declspec(dllimport)
#  endif
#else
#  define ESC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum esc_status {
  ESC_OK = 0,
  ESC_ERR_PARSE = 1,
  ESC_ERR_VALIDATION = 2,
  ESC_ERR_SOLVER = 3,
  ESC_ERR_ARGUMENT = 4,
  ESC_ERR_IO = 5,
  ESC_ERR_INTERNAL = 6
} esc_status;

typedef enum esc_mode { ESC_MODE_NO_ESS = 0, ESC_MODE_SELFISH = 1, ESC_MODE_COOPERATIVE = 2 } esc_mode;

typedef struct esc_scenario esc_scenario;
typedef struct esc_result esc_result;

typedef struct esc_coord_params {
  double step_rho;
  double descent_floor;
  size_t max_iters;
  double accept_tol;
} esc_coord_params;

ESC_API const char* esc_version(void);
ESC_API const char* esc_last_error(void);
ESC_API void esc_string_free(char* s);

/* Scenarios. Loading validates; a failure lists every problem found. */
ESC_API esc_status esc_scenario_load(const char* path, esc_scenario** out);
ESC_API esc_status esc_scenario_from_json(const char* text, const char* base_dir, esc_scenario** out);
ESC_API void esc_scenario_free(esc_scenario* s);
ESC_API size_t esc_scenario_num_users(const esc_scenario* s);
ESC_API size_t esc_scenario_num_slots(const esc_scenario* s);
/* Copy with the battery rescaled to s_max (other sizes keep their ratios). */
ESC_API esc_status esc_scenario_with_capacity(const esc_scenario* s, double s_max, esc_scenario** out);
/* Copy with every load deadline pushed back by extra_slots, clamped to the horizon. */
ESC_API esc_status esc_scenario_with_deadline_extension(const esc_scenario* s, size_t extra_slots,
                                                        esc_scenario** out);

ESC_API esc_status esc_coord_params_default(const esc_scenario* s, esc_coord_params* out);

/* params may be NULL for the defaults. */
ESC_API esc_status esc_run(const esc_scenario* s, esc_mode mode, const esc_coord_params* params, esc_result** out);
ESC_API void esc_result_free(esc_result* r);
ESC_API double esc_result_total_cost(const esc_result* r);
ESC_API esc_status esc_result_user_cost(const esc_result* r, size_t user, double* out);
/* charge and discharge each need room for users * slots values. */
ESC_API esc_status esc_result_plan(const esc_result* r, double* charge, double* discharge, size_t capacity);
/* slots + 1 values. */
ESC_API esc_status esc_result_soc(const esc_result* r, double* out, size_t capacity);
/* Zero outside selfish mode. */
ESC_API size_t esc_result_num_iterations(const esc_result* r);
ESC_API int esc_result_hit_iteration_limit(const esc_result* r);
ESC_API esc_status esc_result_json(const esc_result* r, char** out);
ESC_API esc_status esc_result_write_json(const esc_result* r, const char* path);
/* ESC_ERR_ARGUMENT unless the result came from selfish mode. */
ESC_API esc_status esc_result_write_trace_csv(const esc_result* r, const char* path);

/* All three modes with ordering checks, as a JSON document. */
ESC_API esc_status esc_compare(const esc_scenario* s, const esc_coord_params* params, char** json_out);

/* Exhaustive search over plans on a grid (tiny instances only), as JSON. */
ESC_API esc_status esc_oracle_brute_force(const esc_scenario* s, double grid_step, char** json_out);

/* Re-checks the plan stored in a result document against the battery limits.
 * *feasible is set to 1 or 0; *report_out (optional) lists violations. */
ESC_API esc_status esc_check_plan_json(const esc_scenario* s, const char* result_text, double tol, int* feasible,
                                       char** report_out);

/* Plain-text dump of the joint LP, for cross-checking with other solvers. */
ESC_API esc_status esc_dump_cooperative_lp(const esc_scenario* s, const char* path);

#ifdef __cplusplus
}
#endif

#endif
