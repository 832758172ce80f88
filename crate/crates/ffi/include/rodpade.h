#ifndef RODPADE_H
#define RODPADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_INVALID_UTF8 = 2,
  RP_STATUS_INVALID_CONFIG = 3,
  RP_STATUS_DEGENERATE_ALPHAS = 4,
  RP_STATUS_BAD_BETA = 5,
  RP_STATUS_VERIFICATION_FAILED = 6,
  RP_STATUS_PANIC = 7,
} RpStatus;

/**
 * A built Padé table.
 */
typedef struct RpPadeTable RpPadeTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds the table for `m`, `r`, comma-separated `alphas` and `n`.
 *
 * # Safety
 * `alphas` must be a valid C string and `out` a valid pointer.
 */
enum RpStatus rp_pade_table_new(uintptr_t m,
                                uintptr_t r,
                                const char *alphas,
                                uintptr_t n,
                                struct RpPadeTable **out);

/**
 * # Safety
 * `table` must come from [`rp_pade_table_new`] and not be used afterwards.
 */
void rp_pade_table_free(struct RpPadeTable *table);

/**
 * Number of rows (functions) and columns of a table.
 *
 * # Safety
 * All pointers must be valid.
 */
enum RpStatus rp_pade_table_dims(const struct RpPadeTable *table,
                                 uintptr_t *rows,
                                 uintptr_t *columns);

/**
 * The table as JSON, with rationals as strings.
 *
 * # Safety
 * `table` and `out` must be valid.
 */
enum RpStatus rp_pade_table_to_json(const struct RpPadeTable *table, char **out);

/**
 * The determinant of the table as a rational string such as `"1/2"`.
 * Fails with `VERIFICATION_FAILED` if it is not a nonzero constant.
 *
 * # Safety
 * `table` and `out` must be valid.
 */
enum RpStatus rp_delta_constant(const struct RpPadeTable *table, char **out);

/**
 * Evaluates the criterion and writes the report as JSON. `passes` is set
 * to 1 when both hypotheses hold and 0 otherwise.
 *
 * # Safety
 * String arguments must be valid C strings; `out_json` and `passes` valid pointers.
 */
enum RpStatus rp_criterion_evaluate(uintptr_t m,
                                    uintptr_t r,
                                    const char *alphas,
                                    const char *beta,
                                    const char *place,
                                    char **out_json,
                                    int *passes);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void rp_string_free(char *s);

/**
 * Message for the most recent failure on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *rp_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RODPADE_H */
