#ifndef RESCYCLE_H
#define RESCYCLE_H

/* C interface to the rescycle library. Handles are opaque; every fallible
 * call returns an rc_status and leaves a message in rc_last_error(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RC_API __declspec(dllexport)
#else
#define RC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rc_problem rc_problem;
typedef struct rc_result rc_result;

/* The first four values double as process exit codes. */
typedef enum rc_status {
  RC_OK = 0,
  RC_CHECK_FAILED = 1,
  RC_NO_CONVERGENCE = 2,
  RC_CONFIG_ERROR = 3,
  RC_INVALID_ARGUMENT = 4,
  RC_IO_ERROR = 5,
  RC_INTERNAL_ERROR = 6
} rc_status;

typedef enum rc_command { RC_SOLVE = 0, RC_VERIFY = 1, RC_DUALITY = 2, RC_SWEEP = 3 } rc_command;

typedef enum rc_map { RC_MAP_COMPOSED = 0, RC_MAP_AVERAGED = 1 } rc_map;

RC_API const char* rc_version(void);

/* Message of the most recent failure on this thread ("" if none). */
RC_API const char* rc_last_error(void);

RC_API rc_status rc_problem_load(const char* path, rc_problem** out);
RC_API rc_status rc_problem_parse(const char* text, size_t length, rc_problem** out);
RC_API void rc_problem_free(rc_problem* problem);

RC_API size_t rc_problem_blocks(const rc_problem* problem);
RC_API size_t rc_problem_dimension(const rc_problem* problem);
RC_API const char* rc_problem_config_hash(const rc_problem* problem);

/* Overrides of the config's solver block. Values are validated by rc_run. */
RC_API rc_status rc_problem_set_tol(rc_problem* problem, double tol);
RC_API rc_status rc_problem_set_max_iter(rc_problem* problem, size_t max_iter);
RC_API rc_status rc_problem_set_seed(rc_problem* problem, uint64_t seed);
RC_API rc_status rc_problem_set_starts(rc_problem* problem, size_t starts);
/* Also resets alpha to the map's default (0.5 composed, 1 averaged). */
RC_API rc_status rc_problem_set_map(rc_problem* problem, rc_map map);
RC_API rc_status rc_problem_set_alpha(rc_problem* problem, double alpha);

/* Sweep grid. An empty grid means {composed 0.5, averaged 1}. */
RC_API rc_status rc_problem_sweep_clear(rc_problem* problem);
RC_API rc_status rc_problem_sweep_add(rc_problem* problem, rc_map map, double alpha);

/* Runs a command. The return value reports errors that prevented a result
 * (RC_CONFIG_ERROR, ...); the verdict of a completed run is
 * rc_result_exit_code. */
RC_API rc_status rc_run(const rc_problem* problem, rc_command command, rc_result** out);
RC_API void rc_result_free(rc_result* result);

RC_API int rc_result_exit_code(const rc_result* result);
RC_API const char* rc_result_message(const rc_result* result);
/* Contents of result.json. Owned by the result. */
RC_API const char* rc_result_json(const rc_result* result);
/* Writes result.json, trace_<k>.csv and meta.json into dir. */
RC_API rc_status rc_result_write(const rc_result* result, const char* dir);

RC_API size_t rc_result_num_starts(const rc_result* result);
RC_API int rc_result_start_converged(const rc_result* result, size_t start);
RC_API size_t rc_result_start_iterations(const rc_result* result, size_t start);
/* Copy m*n block-major values into buffer; RC_INVALID_ARGUMENT if absent or
 * the buffer is too short. */
RC_API rc_status rc_result_cycle(const rc_result* result, size_t start, double* buffer, size_t length);
RC_API rc_status rc_result_gap(const rc_result* result, size_t start, double* buffer, size_t length);
RC_API rc_status rc_result_consensus_gap(const rc_result* result, double* buffer, size_t length);

RC_API size_t rc_result_trace_length(const rc_result* result, size_t start);
RC_API rc_status rc_result_trace_row(const rc_result* result, size_t start, size_t row,
                                     size_t* iteration, double* residual, double* gap_norm);

RC_API size_t rc_result_num_checks(const rc_result* result);
/* name stays valid for the lifetime of the result. */
RC_API rc_status rc_result_check(const rc_result* result, size_t index, const char** name,
                                 int* pass, double* value, double* threshold);

#ifdef __cplusplus
}
#endif

#endif
