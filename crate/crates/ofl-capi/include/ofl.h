#ifndef OFL_CAPI_H
#define OFL_CAPI_H

/* Generated by cbindgen from the ofl-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Algorithm selector for [`ofl_run`].
 */
#define OFL_ALGORITHM_PAM 0

#define OFL_ALGORITHM_MEYERSON 1

#define OFL_ALGORITHM_FOLLOW_PREDICT 2

/**
 * Solver selector for [`ofl_solve_offline`].
 */
#define OFL_SOLVER_MP 0

#define OFL_SOLVER_BRUTE_FORCE 1

/**
 * Result codes returned by every fallible function.
 */
typedef enum OflStatus {
  Ok = 0,
  NullPointer = 1,
  InvalidArgument = 2,
  InvalidUtf8 = 3,
  ParseError = 4,
  ValidationError = 5,
  ConfigError = 6,
  IoError = 7,
  IndexError = 8,
  InternalPanic = 9,
} OflStatus;

/**
 * Opaque online instance handle.
 */
typedef struct OflInstance OflInstance;

/**
 * Opaque prediction stream handle.
 */
typedef struct OflPredictions OflPredictions;

/**
 * Cost breakdown of a finished run or offline solution.
 */
typedef struct OflCostReport {
  double opening_cost;
  double connection_cost;
  double total_cost;
  uint64_t open_facilities;
} OflCostReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the last error on this thread into `buf`
 * (NUL-terminated, truncated to `len`). Returns the full message length in
 * bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be NULL or point to at least `len` writable bytes.
 */
size_t ofl_last_error_message(char *buf, size_t len);

/**
 * Loads a Euclidean instance from a demand points CSV and a facilities CSV.
 * On success stores a new handle in `out`; free it with
 * [`ofl_instance_free`].
 *
 * # Safety
 * The path pointers must be NULL or valid NUL-terminated strings; `out`
 * must be a valid pointer to pointer storage.
 */
enum OflStatus ofl_instance_load_euclidean(const char *points_path,
                                           const char *facilities_path,
                                           struct OflInstance **out);

/**
 * Loads a graph instance from an edge list, a demand vertex list, and a
 * facilities CSV. See [`ofl_instance_load_euclidean`] for the contract.
 *
 * # Safety
 * As for [`ofl_instance_load_euclidean`].
 */
enum OflStatus ofl_instance_load_graph(const char *edges_path,
                                       const char *demands_path,
                                       const char *facilities_path,
                                       struct OflInstance **out);

/**
 * Releases an instance handle. NULL is ignored.
 *
 * # Safety
 * `inst` must be NULL or a pointer returned by an `ofl_instance_load_*`
 * function that has not been freed yet.
 */
void ofl_instance_free(struct OflInstance *inst);

/**
 * Number of demands in the instance; 0 for NULL.
 *
 * # Safety
 * `inst` must be NULL or a live instance handle.
 */
uint64_t ofl_instance_num_demands(const struct OflInstance *inst);

/**
 * Number of facilities in the instance; 0 for NULL.
 *
 * # Safety
 * `inst` must be NULL or a live instance handle.
 */
uint64_t ofl_instance_num_facilities(const struct OflInstance *inst);

/**
 * Loads a prediction stream (one facility index per line) aligned with the
 * instance's demands. Free with [`ofl_predictions_free`].
 *
 * # Safety
 * `inst` must be a live instance handle; `path` a valid NUL-terminated
 * string; `out` valid pointer storage.
 */
enum OflStatus ofl_predictions_load(const struct OflInstance *inst,
                                    const char *path,
                                    struct OflPredictions **out);

/**
 * Releases a prediction stream handle. NULL is ignored.
 *
 * # Safety
 * `preds` must be NULL or a pointer returned by [`ofl_predictions_load`]
 * that has not been freed yet.
 */
void ofl_predictions_free(struct OflPredictions *preds);

/**
 * Runs one online algorithm (`OFL_ALGORITHM_*`) with the given seed and
 * writes the cost breakdown into `out`. `preds` may be NULL for the
 * prediction-free baseline, and is required otherwise.
 *
 * # Safety
 * `inst` must be a live instance handle, `preds` NULL or a live prediction
 * handle loaded against `inst`, and `out` a valid pointer.
 */
enum OflStatus ofl_run(const struct OflInstance *inst,
                       uint32_t algorithm,
                       const struct OflPredictions *preds,
                       uint64_t seed,
                       struct OflCostReport *out);

/**
 * Solves the instance offline with `OFL_SOLVER_MP` (3-approximation) or
 * `OFL_SOLVER_BRUTE_FORCE` (exact, at most 20 facilities) and writes the
 * cost breakdown into `out`.
 *
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum OflStatus ofl_solve_offline(const struct OflInstance *inst,
                                 uint32_t solver,
                                 struct OflCostReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFL_CAPI_H */
