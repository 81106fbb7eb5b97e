#ifndef FIGURE_EIGHT_H
#define FIGURE_EIGHT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FeStatus {
  FE_STATUS_OK = 0,
  FE_STATUS_NULL_POINTER = 1,
  FE_STATUS_INVALID_ARGUMENT = 2,
  FE_STATUS_NUMERICAL = 3,
  FE_STATUS_PARSE = 4,
  FE_STATUS_IO = 5,
  FE_STATUS_PANIC = 6,
} FeStatus;

/**
 * A Fourier loop, with the action when it came from the minimizer.
 */
typedef struct FeLoop FeLoop;

typedef struct FeReport FeReport;

/**
 * Refined shooting unknowns.
 */
typedef struct FeSolution FeSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * success. Valid until the next call on the same thread.
 */
const char *fe_last_error_message(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void fe_string_free(char *s);

/**
 * Minimizes the action from the seed loop. `config_json` may be NULL.
 *
 * # Safety
 * `config_json` is NULL or a NUL-terminated string; `out` is writable.
 */
enum FeStatus fe_solve(const char *config_json, struct FeLoop **out);

/**
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum FeStatus fe_loop_from_json(const char *json, struct FeLoop **out);

/**
 * # Safety
 * `l` is a live handle; `out` is writable. Free the string with [`fe_string_free`].
 */
enum FeStatus fe_loop_to_json(const struct FeLoop *l, char **out);

/**
 * Action at the minimum, NaN for loaded loops.
 *
 * # Safety
 * `l` is a live handle; `out` is writable.
 */
enum FeStatus fe_loop_action(const struct FeLoop *l, double *out);

/**
 * # Safety
 * `l` is NULL or a handle not yet freed.
 */
void fe_loop_free(struct FeLoop *l);

/**
 * Extracts shooting unknowns from the loop and refines them.
 *
 * # Safety
 * `l` is a live handle; `config_json` is NULL or a NUL-terminated string; `out` is writable.
 */
enum FeStatus fe_refine(const struct FeLoop *l, const char *config_json, struct FeSolution **out);

/**
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum FeStatus fe_solution_from_json(const char *json, struct FeSolution **out);

/**
 * # Safety
 * `s` is a live handle; `out` is writable. Free the string with [`fe_string_free`].
 */
enum FeStatus fe_solution_to_json(const struct FeSolution *s, char **out);

/**
 * Writes `x2, y3, u, w` at `t = −T/12`.
 *
 * # Safety
 * `s` is a live handle; `out` points to four writable doubles.
 */
enum FeStatus fe_solution_unknowns(const struct FeSolution *s, double *out);

/**
 * # Safety
 * `s` is a live handle; `out` is writable.
 */
enum FeStatus fe_solution_residual_norm(const struct FeSolution *s, double *out);

/**
 * # Safety
 * `s` is NULL or a handle not yet freed.
 */
void fe_solution_free(struct FeSolution *s);

/**
 * Runs every check on the solution. A report with failed checks is still
 * `FE_STATUS_OK`; inspect it with [`fe_report_all_passed`].
 *
 * # Safety
 * `s` is a live handle; `config_json` is NULL or a NUL-terminated string; `out` is writable.
 */
enum FeStatus fe_verify(const struct FeSolution *s, const char *config_json, struct FeReport **out);

/**
 * # Safety
 * `r` is a live handle; `out` is writable.
 */
enum FeStatus fe_report_all_passed(const struct FeReport *r, bool *out);

/**
 * # Safety
 * `r` is a live handle; `out` is writable.
 */
enum FeStatus fe_report_check_count(const struct FeReport *r, uintptr_t *out);

/**
 * Outcome of check `index`. Any out-pointer may be NULL; the name must be
 * freed with [`fe_string_free`].
 *
 * # Safety
 * `r` is a live handle; non-NULL out-pointers are writable.
 */
enum FeStatus fe_report_check(const struct FeReport *r,
                              uintptr_t index,
                              char **name,
                              bool *passed,
                              double *margin);

/**
 * # Safety
 * `r` is a live handle; `out` is writable. Free the string with [`fe_string_free`].
 */
enum FeStatus fe_report_to_json(const struct FeReport *r, char **out);

/**
 * # Safety
 * `r` is NULL or a handle not yet freed.
 */
void fe_report_free(struct FeReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIGURE_EIGHT_H */
