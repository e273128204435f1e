#ifndef HYSTERESIS_H
#define HYSTERESIS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum HlStatus {
  HL_STATUS_OK = 0,
  /**
   * A parameter violates the loop's constraints.
   */
  HL_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The request has no answer for this loop, e.g. the area of an open curve.
   */
  HL_STATUS_DOMAIN = 2,
  HL_STATUS_NULL_POINTER = 3,
  /**
   * A bug inside the library; the handle should not be reused.
   */
  HL_STATUS_INTERNAL = 4,
} HlStatus;

/**
 * Opaque loop handle.
 */
typedef struct HlLoop HlLoop;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates the shifted smooth loop. Shifts are in radians; `m` must be odd.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum HlStatus hl_loop_new_shifted(double a,
                                  double bx,
                                  double by,
                                  uint32_t m,
                                  uint32_t n,
                                  double d1,
                                  double d2,
                                  double d3,
                                  struct HlLoop **out);

/**
 * Creates a play loop with ramp angle `beta` and gain angle `gamma`, radians.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum HlStatus hl_loop_new_play(double a,
                               double bx,
                               double by,
                               double beta,
                               double gamma,
                               struct HlLoop **out);

/**
 * Creates a named preset, using the same names as the command-line tool
 * (for example `"triple_classical"`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` valid for writing.
 */
enum HlStatus hl_loop_new_preset(const char *name, struct HlLoop **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `lp` must come from a constructor and not be freed twice.
 */
void hl_loop_free(struct HlLoop *lp);

/**
 * Parameter period of the loop, or NaN for a null handle.
 *
 * # Safety
 * `lp` must be null or a live handle.
 */
double hl_loop_period(const struct HlLoop *lp);

/**
 * Evaluates the loop at phase `alpha`.
 *
 * # Safety
 * `lp` must be a live handle and `x`, `y` valid for writing.
 */
enum HlStatus hl_loop_eval(const struct HlLoop *lp, double alpha, double *x, double *y);

/**
 * Samples `count` points over one closed period into `xs` and `ys`.
 *
 * # Safety
 * `lp` must be a live handle and `xs`, `ys` valid for `count` writes.
 */
enum HlStatus hl_loop_sample(const struct HlLoop *lp, size_t count, double *xs, double *ys);

/**
 * Signed enclosed area; counterclockwise loops are positive.
 *
 * # Safety
 * `lp` must be a live handle and `area` valid for writing.
 */
enum HlStatus hl_loop_area(const struct HlLoop *lp, double *area);

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hl_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYSTERESIS_H */
